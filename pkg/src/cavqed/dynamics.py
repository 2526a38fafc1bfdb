"""Time evolution for pure states and density matrices.

Pure states follow d(psi)/dt = -i H(t) psi; density matrices follow
the zero-temperature master equation

    d(rho)/dt = -i [H, rho] + sum_m (G_f/2)(2 a_m rho a_m^dag - {a_m^dag a_m, rho})
                            + (G_a/2)(2 s- rho s+ - {s+ s-, rho}).

The default integrator is fixed-step RK4 on the harmonic decomposition
H(t) = sum_k e^{i f_k t} M_k (dispatched to the numba or numpy backend);
an adaptive dormand-prince path via scipy is available for stiff runs.
Piecewise generators are handled by aligning integration pieces to the
window edges exactly, so discontinuities are never stepped across.

Norm and trace drift are diagnostics, not silently repaired: a pure run
whose norm drifts beyond tolerance raises NumericalFailure with a
suggested smaller step, and a density-matrix run is gated on trace,
Hermiticity, and positivity at every sample.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import algebra as al
from .backends import get_kernels
from .effective import PiecewiseHamiltonian
from .errors import ConfigurationError, NumericalFailure, SpaceMismatchError

NORM_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-8
HERMITICITY_TOLERANCE = 1e-8
POSITIVITY_TOLERANCE = 1e-6
MAX_EIGENCHECKS = 50
MIN_STEPS_PER_CYCLE = 20

METHOD_FIXED = "RK4-fixed"
METHOD_ADAPTIVE = "RK-adaptive"

# Observables that do not depend on the rotating frame a trajectory was
# computed in (mode-phase rotations and atomic frame changes leave them
# invariant).  Fixed-angle quadrature data is deliberately absent.
FRAME_INSENSITIVE_COLUMNS = frozenset({
    "n_a", "n_b", "pop_e", "purity", "var_x_min", "squeezing_degree",
    "trace_error", "tail_weight",
})


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration method, step control, and output grid.

    For the fixed-step method ``dt`` is the step size; left unset it is
    derived from the fastest term frequency as 2*pi/(20 f_max) (or from
    the output grid spacing when the generator is static).  For the
    adaptive method (rel_tol, abs_tol, dt_max) control scipy's DOP853.
    ``t_grid`` is the strictly increasing sequence of sample times.
    ``renormalize`` rescales the state at each sample; it is off by
    default because norm drift is an error signal, not noise to hide.
    """

    method: str = METHOD_FIXED
    dt: float = None
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_max: float = None
    t_grid: object = None
    renormalize: bool = False
    backend: str = None

    def __post_init__(self):
        if self.method not in (METHOD_FIXED, METHOD_ADAPTIVE):
            raise ConfigurationError(
                f"method must be {METHOD_FIXED!r} or {METHOD_ADAPTIVE!r}, "
                f"got {self.method!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")

    def grid(self):
        if self.t_grid is None:
            raise ConfigurationError("IntegratorConfig.t_grid is required")
        g = np.asarray(self.t_grid, dtype=np.float64)
        if g.ndim != 1 or g.size < 1:
            raise ConfigurationError("t_grid must be a 1-d sequence of times")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ConfigurationError("t_grid must be strictly increasing")
        return g


@dataclass
class Trajectory:
    """Sampled evolution: times, state snapshots, per-sample diagnostics.

    ``diagnostics`` maps name -> array aligned with ``times``.  Pure
    runs carry norm_drift and tail_weight; density-matrix runs carry
    trace_drift, herm_drift, min_eigenvalue (NaN where the eigencheck
    was skipped), and tail_weight.  ``frame`` names the rotating frame
    the states live in; see ``align_frames``.
    """

    times: np.ndarray
    states: list
    diagnostics: dict
    frame: str = "unspecified"
    kind: str = "pure"

    @property
    def final_state(self):
        return self.states[-1]

    def expectations(self, op):
        """Complex expectation series of an Operator along the trajectory."""
        return np.array([al.expectation(s, op) for s in self.states])


def align_frames(traj, frame):
    """Annotate a trajectory with the rotating frame it was computed in."""
    if not frame or not isinstance(frame, str):
        raise ConfigurationError("frame must be a non-empty string tag")
    return replace(traj, frame=frame)


def check_frame_comparison(frame_a, frame_b, columns):
    """Reject cross-frame comparison of frame-sensitive observables.

    Trajectories in the same declared frame compare on anything; in
    different frames only columns in FRAME_INSENSITIVE_COLUMNS may be
    compared.
    """
    if frame_a == frame_b:
        return
    sensitive = [c for c in columns if c not in FRAME_INSENSITIVE_COLUMNS]
    if sensitive:
        raise ConfigurationError(
            "cannot compare frame-sensitive columns %s across frames "
            "%r and %r" % (sensitive, frame_a, frame_b))


def _tail_weight(state):
    """Population in the top Fock level of any mode in the state."""
    space = state.space
    if state.pure:
        p = np.abs(state.data) ** 2
    else:
        p = np.real(np.diag(state.data))
    arr = p.reshape(space.dims)
    core = arr
    has_mode = False
    for ax, f in enumerate(space.factors):
        if isinstance(f, al.Mode):
            has_mode = True
            core = np.take(core, np.arange(f.dim - 1), axis=ax)
    if not has_mode:
        return 0.0
    return float(max(p.sum() - core.sum(), 0.0))


def _expand_pieces(h, t_start, t_end):
    """Cover [t_start, t_end] with (u, v, freqs, mats) pieces.

    A plain harmonic Hamiltonian is one piece; a piecewise generator is
    split exactly at its window edges, with empty term arrays (H = 0)
    in the gaps.
    """
    d = h.space.total_dim
    empty = (np.zeros(0, dtype=np.float64),
             np.zeros((0, d, d), dtype=np.complex128))
    if isinstance(h, PiecewiseHamiltonian):
        edges = [e for e in h.boundaries() if t_start < e < t_end]
        points = [t_start] + edges + [t_end]
        cache = {}
        pieces = []
        for u, v in zip(points[:-1], points[1:]):
            seg = h.segment_at(0.5 * (u + v))
            if seg is None:
                fm = empty
            else:
                key = id(seg)
                if key not in cache:
                    cache[key] = seg.expanded_terms()
                fm = cache[key]
            pieces.append((u, v, fm[0], fm[1]))
        return pieces
    freqs, mats = h.expanded_terms()
    if freqs.size == 0:
        return [(t_start, t_end, *empty)]
    return [(t_start, t_end, freqs, mats)]


def _resolve_dt(cfg, h, grid):
    """Fixed step size, derived from f_max when not given; warn if coarse."""
    fmax = h.max_frequency()
    dt = cfg.dt
    if dt is None:
        if fmax > 0:
            dt = 2.0 * math.pi / (MIN_STEPS_PER_CYCLE * fmax)
        elif grid.size > 1:
            dt = float(np.min(np.diff(grid))) / MIN_STEPS_PER_CYCLE
        else:
            dt = 1.0
    if fmax > 0:
        cycles = 2.0 * math.pi / (fmax * dt)
        if cycles < MIN_STEPS_PER_CYCLE * (1.0 - 1e-9):
            warnings.warn(
                "dt=%g resolves the fastest frequency %g with only %.1f "
                "steps per cycle (>= %d recommended)"
                % (dt, fmax, cycles, MIN_STEPS_PER_CYCLE),
                RuntimeWarning, stacklevel=3)
    return dt


def _suggest_dt(dt, drift, tol):
    if drift <= 0:
        return dt
    return dt * (tol / (2.0 * drift)) ** 0.2


def _eigencheck_indices(n):
    idx = np.unique(np.round(np.linspace(0, n - 1, min(n, MAX_EIGENCHECKS)))
                    .astype(int))
    return set(int(i) for i in idx)


def evolve_schrodinger(h, psi0, cfg, frame="unspecified"):
    """Propagate a pure state and sample it on cfg.t_grid.

    Raises NumericalFailure when the norm drifts by more than 1e-6 from
    its initial value at any sample, with a suggested smaller step in
    the message.
    """
    if not isinstance(psi0, al.State) or not psi0.pure:
        raise ConfigurationError("evolve_schrodinger needs a pure State")
    if h.space != psi0.space:
        raise SpaceMismatchError("Hamiltonian and state on different spaces")
    grid = cfg.grid()
    pieces = _expand_pieces(h, grid[0], grid[-1])
    kern = get_kernels(cfg.backend)
    adaptive = cfg.method == METHOD_ADAPTIVE
    dt = None if adaptive else _resolve_dt(cfg, h, grid)

    psi = psi0.data.copy()
    norm0 = float(np.linalg.norm(psi))
    if norm0 == 0.0:
        raise ConfigurationError("initial state has zero norm")

    def advance(vec, t0, t1):
        for (u, v, freqs, mats) in pieces:
            lo, hi = max(u, t0), min(v, t1)
            if hi <= lo:
                continue
            if freqs.size == 0:
                continue
            if adaptive:
                vec = _adaptive_segment_pure(vec, lo, hi, freqs, mats, cfg)
            else:
                n = max(1, int(math.ceil((hi - lo) / dt - 1e-9)))
                vec = kern.schrodinger_rk4(vec, lo, (hi - lo) / n, n,
                                           freqs, mats)
        return vec

    states = []
    norm_drift = np.empty(grid.size)
    tail = np.empty(grid.size)
    for i, t in enumerate(grid):
        if i > 0:
            psi = advance(psi, grid[i - 1], t)
        nrm = float(np.linalg.norm(psi))
        drift = abs(nrm / norm0 - 1.0)
        norm_drift[i] = drift
        if drift > NORM_TOLERANCE:
            hint = ("tighten rel_tol/abs_tol" if adaptive else
                    "retry with dt <= %.3e" % _suggest_dt(dt, drift,
                                                          NORM_TOLERANCE))
            raise NumericalFailure(
                "norm drift %.3e exceeds %.1e at t=%g; %s"
                % (drift, NORM_TOLERANCE, t, hint))
        if cfg.renormalize and nrm > 0:
            psi = psi / nrm
        snap = al.State.from_vector(psi0.space, psi.copy())
        tail[i] = _tail_weight(snap)
        states.append(snap)
    diagnostics = {"norm_drift": norm_drift, "tail_weight": tail}
    return Trajectory(times=grid, states=states, diagnostics=diagnostics,
                      frame=frame, kind="pure")


def _adaptive_segment_pure(vec, t0, t1, freqs, mats, cfg):
    from scipy.integrate import solve_ivp
    from . import _kernels_numpy as knp

    def fun(t, y):
        return knp._schrodinger_rhs(y, t, freqs, mats)

    sol = solve_ivp(fun, (t0, t1), vec, method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=cfg.dt_max or np.inf)
    if not sol.success:
        raise NumericalFailure("adaptive step failed: %s" % sol.message)
    return sol.y[:, -1]


def _collapse_operators(space, gamma_f, gamma_a):
    """Mode and atom collapse operators with rates and L^dag L diagonals."""
    if gamma_f < 0 or gamma_a < 0:
        raise ConfigurationError("decay rates must be >= 0")
    d = space.total_dim
    cops, rates, diags = [], [], []
    if gamma_f > 0:
        labels = space.mode_labels()
        if not labels:
            raise ConfigurationError("Gamma_f > 0 but the space has no modes")
        for label in labels:
            cops.append(al.mode_annihilation(space, label).matrix)
            rates.append(gamma_f)
    if gamma_a > 0:
        if space.atom_label() is None:
            raise ConfigurationError("Gamma_a > 0 but the space has no atom")
        cops.append(al.atom_transition(space, "e", "g").matrix)
        rates.append(gamma_a)
    for L in cops:
        ldl = L.conj().T @ L
        off = ldl - np.diag(np.diag(ldl))
        if np.max(np.abs(off)) > 1e-12:
            raise ConfigurationError("collapse operator with non-diagonal "
                                     "L^dag L is not supported")
        diags.append(np.real(np.diag(ldl)))
    if not cops:
        return (np.zeros((0, d, d), dtype=np.complex128),
                np.zeros(0, dtype=np.float64),
                np.zeros((0, d), dtype=np.float64))
    return (np.array(cops, dtype=np.complex128),
            np.array(rates, dtype=np.float64),
            np.array(diags, dtype=np.float64))


def evolve_lindblad(h, rho0, gamma_f, gamma_a, cfg, frame="unspecified"):
    """Propagate a density matrix under H(t) plus zero-temperature decay.

    ``gamma_f`` applies an independent photon-loss dissipator to every
    mode in the space; ``gamma_a`` applies atomic decay through
    sigma- = |g><e|.  Pure input states are promoted automatically.
    Trace, Hermiticity, and positivity are gated at every sample (the
    eigenvalue check runs on at most 50 samples).
    """
    if not isinstance(rho0, al.State):
        raise ConfigurationError("evolve_lindblad needs a State")
    if h.space != rho0.space:
        raise SpaceMismatchError("Hamiltonian and state on different spaces")
    grid = cfg.grid()
    pieces = _expand_pieces(h, grid[0], grid[-1])
    cops, rates, diags = _collapse_operators(h.space, float(gamma_f),
                                             float(gamma_a))
    kern = get_kernels(cfg.backend)
    adaptive = cfg.method == METHOD_ADAPTIVE
    dt = None if adaptive else _resolve_dt(cfg, h, grid)

    rho = rho0.density_matrix().copy()
    trace0 = float(np.real(np.trace(rho)))
    if trace0 == 0.0:
        raise ConfigurationError("initial state has zero trace")
    dissipating = rates.size > 0

    def advance(mat, t0, t1):
        for (u, v, freqs, mats) in pieces:
            lo, hi = max(u, t0), min(v, t1)
            if hi <= lo:
                continue
            if freqs.size == 0 and not dissipating:
                continue
            if adaptive:
                mat = _adaptive_segment_mixed(mat, lo, hi, freqs, mats,
                                              cops, rates, diags, cfg)
            else:
                n = max(1, int(math.ceil((hi - lo) / dt - 1e-9)))
                mat = kern.lindblad_rk4(mat, lo, (hi - lo) / n, n,
                                        freqs, mats, cops, rates, diags)
        return mat

    states = []
    trace_drift = np.empty(grid.size)
    herm_drift = np.empty(grid.size)
    min_eig = np.full(grid.size, np.nan)
    tail = np.empty(grid.size)
    eig_at = _eigencheck_indices(grid.size)
    for i, t in enumerate(grid):
        if i > 0:
            rho = advance(rho, grid[i - 1], t)
        tr = float(np.real(np.trace(rho)))
        tdrift = abs(tr / trace0 - 1.0)
        hdrift = float(np.max(np.abs(rho - rho.conj().T)))
        trace_drift[i] = tdrift
        herm_drift[i] = hdrift
        if tdrift > TRACE_TOLERANCE:
            hint = ("tighten rel_tol/abs_tol" if adaptive else
                    "retry with dt <= %.3e" % _suggest_dt(dt, tdrift,
                                                          TRACE_TOLERANCE))
            raise NumericalFailure(
                "trace drift %.3e exceeds %.1e at t=%g; %s"
                % (tdrift, TRACE_TOLERANCE, t, hint))
        if hdrift > HERMITICITY_TOLERANCE:
            raise NumericalFailure(
                "Hermiticity drift %.3e exceeds %.1e at t=%g"
                % (hdrift, HERMITICITY_TOLERANCE, t))
        if i in eig_at:
            lo_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0])
            min_eig[i] = lo_eig
            if lo_eig < -POSITIVITY_TOLERANCE:
                raise NumericalFailure(
                    "min eigenvalue %.3e below -%.1e at t=%g"
                    % (lo_eig, POSITIVITY_TOLERANCE, t))
        if cfg.renormalize and tr > 0:
            rho = rho / tr
        snap = al.State.from_density(rho0.space, rho.copy())
        tail[i] = _tail_weight(snap)
        states.append(snap)
    diagnostics = {"trace_drift": trace_drift, "herm_drift": herm_drift,
                   "min_eigenvalue": min_eig, "tail_weight": tail}
    return Trajectory(times=grid, states=states, diagnostics=diagnostics,
                      frame=frame, kind="mixed")


def _adaptive_segment_mixed(mat, t0, t1, freqs, mats, cops, rates, diags, cfg):
    from scipy.integrate import solve_ivp
    from . import _kernels_numpy as knp

    d = mat.shape[0]

    def fun(t, y):
        rho = y.reshape(d, d)
        return knp._lindblad_rhs(rho, t, freqs, mats, cops, rates,
                                 diags).ravel()

    sol = solve_ivp(fun, (t0, t1), mat.ravel(), method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=cfg.dt_max or np.inf)
    if not sol.success:
        raise NumericalFailure("adaptive step failed: %s" % sol.message)
    return sol.y[:, -1].reshape(d, d)
