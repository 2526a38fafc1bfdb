"""Field and atom observables: quadratures, squeezing, populations.

Quadrature convention: X_theta = (a e^{-i theta} + a^dag e^{i theta})/2,
so the vacuum variance is 1/4 and the degree of squeezing is
100 (1 - var_min/0.25) percent.  The minimal variance over theta is
found in closed form from the three moments <a>, <a^2>, <a^dag a>:

    var(theta) = [1 + 2 B + 2 Re(A e^{-2 i theta})] / 4

with A = <a^2> - <a>^2 and B = <a^dag a> - |<a>|^2, minimized at
2 theta = arg(A) + pi, giving var_min = (1 + 2 B - 2|A|)/4.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from . import algebra as al
from .errors import DimensionError, SpaceMismatchError

VACUUM_VARIANCE = 0.25


def _mode_moments(state, mode):
    """(<a>, <a^2>, <a^dag a>) for the named mode."""
    a = al.mode_annihilation(state.space, mode)
    m1 = al.expectation(state, a)
    m2 = al.expectation(state, a @ a)
    n = al.expectation(state, a.dagger() @ a).real
    return m1, m2, n


@dataclass(frozen=True)
class QuadratureResult:
    """Minimal-variance quadrature readout of one mode."""

    theta_min: float
    var_min: float
    moment_a: complex
    moment_a2: complex
    mean_n: float

    @property
    def squeezing_degree(self):
        """Percent reduction of var_min below the vacuum value 1/4."""
        return 100.0 * (1.0 - self.var_min / VACUUM_VARIANCE)

    def var_at(self, theta):
        A = self.moment_a2 - self.moment_a ** 2
        B = self.mean_n - abs(self.moment_a) ** 2
        return (1.0 + 2.0 * B + 2.0 * (A * cmath.exp(-2j * theta)).real) / 4.0


def quadrature_variance(state, mode, theta):
    """Variance of X_theta = (a e^{-i theta} + a^dag e^{i theta})/2."""
    m1, m2, n = _mode_moments(state, mode)
    A = m2 - m1 ** 2
    B = n - abs(m1) ** 2
    return (1.0 + 2.0 * B + 2.0 * (A * cmath.exp(-2j * theta)).real) / 4.0


def quadrature_from_moments(m1, m2, n):
    """QuadratureResult from the three field moments <a>, <a^2>, <a^dag a>.

    theta_min is reported in [0, pi); for rotationally symmetric states
    (A = 0) every angle is minimal and 0 is returned.
    """
    m1, m2, n = complex(m1), complex(m2), float(np.real(n))
    A = m2 - m1 ** 2
    B = n - abs(m1) ** 2
    if abs(A) == 0:
        theta = 0.0
    else:
        theta = ((cmath.phase(A) + np.pi) / 2.0) % np.pi
    var_min = (1.0 + 2.0 * B - 2.0 * abs(A)) / 4.0
    return QuadratureResult(theta_min=float(theta), var_min=float(var_min),
                            moment_a=m1, moment_a2=m2, mean_n=n)


def min_quadrature_variance(state, mode):
    """Closed-form minimization of var(theta) over the quadrature angle."""
    m1, m2, n = _mode_moments(state, mode)
    return quadrature_from_moments(m1, m2, n)


def photon_number(state, mode):
    """<a^dag a> of the named mode."""
    a = al.mode_annihilation(state.space, mode)
    return al.expectation(state, a.dagger() @ a).real


def populations(state):
    """Diagonal of the density matrix in the product basis."""
    if state.pure:
        return np.abs(state.data) ** 2
    return np.real(np.diag(state.data)).copy()


def atom_excited_population(state):
    """Population of |e>, traced over the field."""
    label = state.space.atom_label()
    if label is None:
        raise SpaceMismatchError("state has no atom factor")
    s_ee = al.atom_transition(state.space, "e", "e")
    return al.expectation(state, s_ee).real


def basis_population(state, parts):
    """Population of the product basis state described by ``parts``."""
    target = al.product_state(state.space, parts)
    return fidelity(target, state)


def purity(state, subsystem=None):
    """Tr(rho^2), after reduction to ``subsystem`` (a factor label) if given."""
    if subsystem is not None:
        state = al.partial_trace_keep_labels(state, [subsystem])
    if state.pure:
        nrm = np.linalg.norm(state.data)
        return float(nrm ** 4)
    rho = state.data
    return float(np.real(np.sum(rho * rho.T)))


def fidelity(a, b):
    """|<psi|phi>|^2 for two pure states, <psi|rho|psi> for pure-mixed."""
    if a.space != b.space:
        raise SpaceMismatchError("fidelity operands live on different spaces")
    if a.pure and b.pure:
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if a.pure:
        return float(np.real(np.vdot(a.data, b.data @ a.data)))
    if b.pure:
        return float(np.real(np.vdot(b.data, a.data @ b.data)))
    raise DimensionError("mixed-mixed fidelity is not supported")


def truncation_tail(state, mode, k=5):
    """Total population in the top ``k`` Fock levels of the mode."""
    dim = state.space.factor(mode).dim
    if not 0 <= k < dim:
        raise DimensionError(f"tail width {k} must be < cutoff {dim}")
    if k == 0:
        return 0.0
    reduced = al.partial_trace_keep_labels(state, [mode])
    probs = np.real(np.diag(reduced.data))
    return float(np.sum(probs[dim - k:]))
