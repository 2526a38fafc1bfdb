"""Driven atom-cavity model: parameters, harmonic Hamiltonians, frames.

A two-level atom couples to one or two cavity modes and is driven by up
to two classical fields.  All frequencies are expressed in units of the
atom-mode coupling lambda_a and time in units of 1/lambda_a.  The model
is built in three frames:

* lab frame: static mode/atom energies plus explicitly oscillating
  drive terms;
* interaction picture: only coupling terms, each oscillating at its
  detuning;
* laser frame: the atom is dressed by drive 1, and each mode couples to
  the dressed-state operators at frequencies delta_alpha - delta_1 and
  delta_alpha - delta_1 +/- 2|Omega_1|.

Time-dependent Hamiltonians are harmonic decompositions
H(t) = sum_k c_k h_k e^{i w_k t} + h.c., stored as (operator,
amplitude, frequency) triples with an implied Hermitian closure.
Static Hermitian contributions are stored at half amplitude so the
closure restores them.
"""

import cmath
from dataclasses import dataclass, field, replace

import numpy as np

from . import algebra as al
from .errors import ConfigurationError, RegimeValidityError, SpaceMismatchError

MUCH_GREATER = 10.0   # ratio implementing ">>"
SIMILAR_FACTOR = 3.0  # max ratio implementing "~"


def build_space(cutoff_a, cutoff_b=None, atom=True):
    """Composite space in the global ordering: mode a, mode b, atom."""
    factors = [al.Mode("a", cutoff_a)]
    if cutoff_b is not None:
        factors.append(al.Mode("b", cutoff_b))
    if atom:
        factors.append(al.Atom())
    return al.HilbertSpace(tuple(factors))


@dataclass(frozen=True)
class SystemParams:
    """All physical parameters, in units of lambda_a.

    Frequencies are absolute; detunings are derived (delta_a = omega0 -
    omega_a and so on).  Use :meth:`from_detunings` to specify detunings
    directly.  Missing drives default to zero amplitude; a missing mode
    b is signalled by omega_b = None.
    """

    omega0: float
    omega_a: float
    omega_b: float = None
    lambda_a: float = 1.0
    lambda_b: float = 0.0
    Omega1_mag: float = 0.0
    phi1: float = 0.0
    Omega2_mag: float = 0.0
    phi2: float = 0.0
    omega1: float = None
    omega2: float = None
    Gamma_f: float = 0.0
    Gamma_a: float = 0.0

    def __post_init__(self):
        for name in ("lambda_a", "lambda_b", "Omega1_mag", "Omega2_mag",
                     "Gamma_f", "Gamma_a"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.lambda_b > 0 and self.omega_b is None:
            raise ConfigurationError("lambda_b > 0 requires omega_b")

    @classmethod
    def from_detunings(cls, omega0=1.0e5, delta_a=0.0, delta_b=None,
                       delta1=0.0, delta2=0.0, **kwargs):
        """Build params from detunings delta_x = omega0 - omega_x."""
        omega_b = None if delta_b is None else omega0 - delta_b
        return cls(omega0=omega0, omega_a=omega0 - delta_a, omega_b=omega_b,
                   omega1=omega0 - delta1, omega2=omega0 - delta2, **kwargs)

    @property
    def delta_a(self):
        return self.omega0 - self.omega_a

    @property
    def delta_b(self):
        return None if self.omega_b is None else self.omega0 - self.omega_b

    @property
    def delta1(self):
        return 0.0 if self.omega1 is None else self.omega0 - self.omega1

    @property
    def delta2(self):
        return 0.0 if self.omega2 is None else self.omega0 - self.omega2

    @property
    def lambda_tilde_a(self):
        """lambda_a e^{-i phi_1}: coupling as seen from the dressed frame."""
        return self.lambda_a * cmath.exp(-1j * self.phi1)

    @property
    def lambda_tilde_b(self):
        return self.lambda_b * cmath.exp(-1j * self.phi1)

    @property
    def Omega1(self):
        return self.Omega1_mag * cmath.exp(1j * self.phi1)

    @property
    def Omega2(self):
        return self.Omega2_mag * cmath.exp(1j * self.phi2)

    @property
    def Omega2_tilde(self):
        """Omega_2 e^{-i phi_1} / 2: second drive in the dressed frame."""
        return self.Omega2_mag * cmath.exp(1j * (self.phi2 - self.phi1)) / 2.0

    def has_mode_b(self):
        return self.omega_b is not None

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class HamiltonianTerm:
    op: "al.Operator"
    amp: complex
    freq: float


class HarmonicHamiltonian:
    """H(t) = sum_k amp_k op_k e^{i freq_k t} (+ h.c. if closure is on)."""

    def __init__(self, space, terms, hermitian_closure=True):
        self.space = space
        self.terms = []
        for op, amp, freq in terms:
            if op.space != space:
                raise SpaceMismatchError("term operator lives on a different space")
            freq = float(freq)
            if not np.isfinite(freq):
                raise ConfigurationError(f"non-finite term frequency {freq}")
            self.terms.append(HamiltonianTerm(op, complex(amp), freq))
        self.hermitian_closure = hermitian_closure

    @property
    def n_terms(self):
        return len(self.terms)

    def evaluate(self, t):
        """Dense matrix of H(t)."""
        d = self.space.total_dim
        mat = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            mat += (term.amp * cmath.exp(1j * term.freq * t)) * term.op.matrix
        if self.hermitian_closure:
            mat = mat + mat.conj().T
        return mat

    def expanded_terms(self, merge_tol=1e-12):
        """Closure-expanded, frequency-merged term list for the kernels.

        Returns (frequencies, matrices) with H(t) = sum_k e^{i f_k t} M_k;
        conjugate terms appear explicitly, and terms whose frequencies
        agree within ``merge_tol`` are summed into one matrix.
        """
        raw = []
        for term in self.terms:
            raw.append((term.freq, term.amp * term.op.matrix))
            if self.hermitian_closure:
                raw.append((-term.freq, np.conj(term.amp) * term.op.matrix.conj().T))
        freqs = []
        mats = []
        for f, m in raw:
            for i, g in enumerate(freqs):
                if abs(f - g) <= merge_tol:
                    mats[i] = mats[i] + m
                    break
            else:
                freqs.append(f)
                mats.append(m)
        return np.array(freqs, dtype=np.float64), np.array(mats, dtype=np.complex128)

    def max_frequency(self):
        """Fastest oscillation frequency |f| over all terms (0 if static)."""
        if not self.terms:
            return 0.0
        return max(abs(t.freq) for t in self.terms)

    def static_matrix(self):
        """Matrix of H(0) -- exact for purely static Hamiltonians."""
        return self.evaluate(0.0)


def _sigma(space, from_level, to_level):
    return al.atom_transition(space, from_level, to_level)


def build_lab_hamiltonian(params, space):
    """Lab-frame Hamiltonian: static energies plus oscillating drives.

    Static field energy (all present modes folded into one term) and
    atomic energy (omega0/2)(sigma_ee - sigma_gg) sit at frequency 0,
    together with the atom-mode couplings; drive j oscillates at
    -omega_j.  Hermitian closure is on, so static Hermitian pieces are
    stored at half amplitude.
    """
    _require_modes(params, space)
    sigma_eg = _sigma(space, "g", "e")
    terms = []

    field = None
    for label, omega in (("a", params.omega_a), ("b", params.omega_b)):
        if omega is None or not space.has(label):
            continue
        mode_op = al.mode_annihilation(space, label)
        n_op = mode_op.dagger() @ mode_op
        field = n_op * omega if field is None else field + n_op * omega
    if field is not None:
        terms.append((field, 0.5, 0.0))

    s_ee = _sigma(space, "e", "e")
    s_gg = _sigma(space, "g", "g")
    terms.append(((s_ee - s_gg) * (params.omega0 / 2.0), 0.5, 0.0))

    for label, lam in (("a", params.lambda_a), ("b", params.lambda_b)):
        if lam > 0:
            terms.append((al.mode_annihilation(space, label) @ sigma_eg, lam, 0.0))

    if params.Omega1_mag > 0:
        terms.append((sigma_eg, params.Omega1, -float(params.omega1 if params.omega1 is not None else params.omega0)))
    if params.Omega2_mag > 0:
        terms.append((sigma_eg, params.Omega2, -float(params.omega2 if params.omega2 is not None else params.omega0)))

    return HarmonicHamiltonian(space, terms, hermitian_closure=True)


def build_interaction_picture(params, space):
    """Interaction picture: coupling terms only, each at its detuning.

    Terms lambda_a e^{i delta_a t} a sigma_eg, lambda_b e^{i delta_b t}
    b sigma_eg, Omega_j e^{i delta_j t} sigma_eg, Hermitian closure on,
    no static part.
    """
    _require_modes(params, space)
    sigma_eg = _sigma(space, "g", "e")
    terms = []
    if params.lambda_a > 0:
        terms.append((al.mode_annihilation(space, "a") @ sigma_eg,
                      params.lambda_a, params.delta_a))
    if params.lambda_b > 0:
        terms.append((al.mode_annihilation(space, "b") @ sigma_eg,
                      params.lambda_b, params.delta_b))
    if params.Omega1_mag > 0:
        terms.append((sigma_eg, params.Omega1, params.delta1))
    if params.Omega2_mag > 0:
        terms.append((sigma_eg, params.Omega2, params.delta2))
    return HarmonicHamiltonian(space, terms, hermitian_closure=True)


def dressed_operators(space, phi1):
    """Dressed-state atomic operators for |+-> = (e^{i phi1}|e> +- |g>)/sqrt(2).

    Returns a dict with keys 'pp-mm' (sigma_++ - sigma_--), 'pm'
    (sigma_+-), 'mp' (sigma_-+), 'pp', 'mm', all expressed in the lab
    atomic basis and embedded in ``space``.
    """
    s_ee = _sigma(space, "e", "e")
    s_gg = _sigma(space, "g", "g")
    s_eg = _sigma(space, "g", "e")
    s_ge = _sigma(space, "e", "g")
    ph = cmath.exp(1j * phi1)
    pp = 0.5 * (s_ee + ph * s_eg + (1 / ph) * s_ge + s_gg)
    mm = 0.5 * (s_ee - ph * s_eg - (1 / ph) * s_ge + s_gg)
    pm = 0.5 * (s_ee - ph * s_eg + (1 / ph) * s_ge - s_gg)
    mp = 0.5 * (s_ee + ph * s_eg - (1 / ph) * s_ge - s_gg)
    return {"pp": pp, "mm": mm, "pm": pm, "mp": mp, "pp-mm": pp - mm}


def build_laser_frame(params, space, strict=True):
    """Laser (dressed) frame for a single strong drive Omega_1.

    Each present mode alpha contributes three terms:
    (lambda~_alpha/2) alpha (sigma_++ - sigma_--) at frequency
    delta_alpha - delta_1, and -(lambda~_alpha/2) alpha sigma_+- /
    +(lambda~_alpha/2) alpha sigma_-+ at frequencies
    delta_alpha - delta_1 +/- 2|Omega_1|.  Requires delta_1 small
    against |Omega_1| and the mode detunings.
    """
    _require_modes(params, space)
    if params.Omega2_mag != 0:
        raise ConfigurationError(
            "laser frame dresses a single drive; set Omega2_mag = 0"
        )
    if params.Omega1_mag <= 0:
        raise ConfigurationError("laser frame requires a nonzero Omega1")

    margins = _delta1_margins(params)
    if strict and any(not ok for _, _, ok in margins):
        failed = [lbl for lbl, _, ok in margins if not ok]
        raise RegimeValidityError(
            f"laser frame precondition failed: {', '.join(failed)}", margins
        )

    dressed = dressed_operators(space, params.phi1)
    two_om = 2.0 * params.Omega1_mag
    terms = []
    for label, lam_t, delta in (("a", params.lambda_tilde_a, params.delta_a),
                                ("b", params.lambda_tilde_b, params.delta_b)):
        if abs(lam_t) == 0 or not space.has(label):
            continue
        mode_op = al.mode_annihilation(space, label)
        base = delta - params.delta1
        half = lam_t / 2.0
        terms.append((mode_op @ dressed["pp-mm"], half, base))
        terms.append((mode_op @ dressed["pm"], -half, base + two_om))
        terms.append((mode_op @ dressed["mp"], half, base - two_om))
    return HarmonicHamiltonian(space, terms, hermitian_closure=True)


def _require_modes(params, space):
    if params.lambda_a > 0 and not space.has("a"):
        raise SpaceMismatchError("params couple mode 'a' but the space lacks it")
    if params.lambda_b > 0 and not space.has("b"):
        raise SpaceMismatchError("params couple mode 'b' but the space lacks it")
    if space.atom_label() is None:
        raise SpaceMismatchError("space lacks an atom factor")


def _delta1_margins(params, much=MUCH_GREATER):
    """Margins for |delta_1| << |Omega_1|, |delta_a|, |delta_b|."""
    d1 = abs(params.delta1)
    margins = []
    checks = [("|Omega1| >> |delta1|", params.Omega1_mag),
              ("|delta_a| >> |delta1|", abs(params.delta_a))]
    if params.delta_b is not None:
        checks.append(("|delta_b| >> |delta1|", abs(params.delta_b)))
    for label, big in checks:
        ratio = np.inf if d1 == 0 else big / d1
        margins.append((label, float(ratio), ratio >= much))
    return margins


@dataclass(frozen=True)
class Regime:
    """Drive-strength regime tag with the margin report that earned it.

    margins: list of (condition label, achieved ratio, passed) where the
    achieved ratio is normalized so that >= 1 means the condition holds
    at its configured threshold.  advisory margins (the dressed-state
    transition gaps) are reported but do not gate the tag.
    """

    tag: str
    margins: tuple = field(default_factory=tuple)
    advisory: tuple = field(default_factory=tuple)

    def ok(self):
        return all(m[2] for m in self.margins)

    def failed_labels(self):
        return [m[0] for m in self.margins if not m[2]]

    def all_margins(self):
        return list(self.margins) + list(self.advisory)


def _ratio_margin(label, big, small, threshold):
    """Margin for big >= threshold * small, normalized to 1."""
    if small == 0:
        achieved = np.inf
    else:
        achieved = (big / small) / threshold
    return (label, float(achieved), achieved >= 1.0)


def _similar_margin(label, x, y, factor):
    """Margin for max(x,y)/min(x,y) <= factor, normalized to 1."""
    lo, hi = sorted((abs(x), abs(y)))
    if hi == 0:
        return (label, np.inf, True)
    if lo == 0:
        return (label, 0.0, False)
    achieved = factor / (hi / lo)
    return (label, float(achieved), achieved >= 1.0)


def dressed_transition_margins(params, much=MUCH_GREATER):
    """Margins for |2|Omega1| +- (delta_alpha - delta_1)| >> |lambda~_alpha|."""
    margins = []
    two_om = 2.0 * params.Omega1_mag
    for label, lam, delta in (("a", params.lambda_a, params.delta_a),
                              ("b", params.lambda_b, params.delta_b)):
        if lam <= 0 or delta is None:
            continue
        base = delta - params.delta1
        for sign, tag in ((+1.0, "+"), (-1.0, "-")):
            gap = abs(two_om + sign * base)
            margins.append(_ratio_margin(
                f"|2 Omega1 {tag} (delta_{label}-delta_1)| >> lambda_{label}",
                gap, lam, much))
    return margins


def regime_candidates(params, much=MUCH_GREATER, similar=SIMILAR_FACTOR):
    """Margin sets for each regime tag, keyed by tag.

    Weak:         |delta_a| ~ |delta_b| >> |Omega1| >~ |lambda|
    Intermediate: |Omega1| ~ |delta_a| ~ |delta_b| >> |lambda|
    Strong:       |Omega1| >> |delta_a| ~ |delta_b| >> |lambda|

    ">>" means ratio >= ``much`` (default 10), "~" within a factor
    ``similar`` (default 3), ">~" means ratio >= 1.  Each ">>" binds
    the chain's head scale (the detunings for Weak, the drive for
    Intermediate, the drive and then the detunings for Strong); scales
    tied to the head by "~" are not separately required to clear the
    ">>" threshold.  The dressed-state transition gaps |2 Omega1 +-
    (delta_alpha - delta_1)| >> lambda are reported as advisory
    margins.  All conditions are ratios, so the classification is
    scale-invariant.
    """
    if params.Omega2_mag != 0:
        raise ConfigurationError("regime classification assumes a single drive")
    lam = max(params.lambda_a, params.lambda_b)
    om = params.Omega1_mag
    da = abs(params.delta_a)
    deltas = [("a", da)]
    if params.delta_b is not None and params.lambda_b > 0:
        deltas.append(("b", abs(params.delta_b)))
    dmin = min(d for _, d in deltas)

    shared = []
    if len(deltas) == 2:
        shared.append(_similar_margin("|delta_a| ~ |delta_b|",
                                      deltas[0][1], deltas[1][1], similar))
    dressed = tuple(dressed_transition_margins(params, much))

    weak = list(shared)
    for label, d in deltas:
        weak.append(_ratio_margin(f"|delta_{label}| >> |Omega1|", d, om, much))
    weak.append(_ratio_margin("|Omega1| >~ lambda", om, lam, 1.0))

    inter = list(shared)
    for label, d in deltas:
        inter.append(_similar_margin(f"|Omega1| ~ |delta_{label}|", om, d, similar))
    inter.append(_ratio_margin("|Omega1| >> lambda", om, lam, much))

    strong = list(shared)
    for label, d in deltas:
        strong.append(_ratio_margin(f"|Omega1| >> |delta_{label}|", om, d, much))
    strong.append(_ratio_margin("min|delta| >> lambda", dmin, lam, much))

    return {
        "Weak": Regime("Weak", tuple(weak), dressed),
        "Intermediate": Regime("Intermediate", tuple(inter), dressed),
        "Strong": Regime("Strong", tuple(strong), dressed),
    }


def classify_regime(params, much=MUCH_GREATER, similar=SIMILAR_FACTOR):
    """Assign the Weak / Intermediate / Strong tag whose margins all pass.

    Raises a regime-validity error carrying the failed margins when no
    tag fits (the caller may then force one).
    """
    candidates = regime_candidates(params, much, similar)
    for tag in ("Weak", "Intermediate", "Strong"):
        if candidates[tag].ok():
            return candidates[tag]
    failed = [m for r in candidates.values() for m in r.margins if not m[2]]
    raise RegimeValidityError(
        "parameters match no amplification regime", failed
    )
