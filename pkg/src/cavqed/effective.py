"""Engineered effective Hamiltonians and their coupling formulas.

Second-order elimination of the dressed-atom dynamics leaves, depending
on the mode detunings, one of three bilinear interactions:

* PDC (pair creation):   Lambda a b + h.c., after adjusting delta_1;
* PUC (photon exchange): Sigma a b^dag e^{i Phi t} + h.c.;
* Squeeze (one mode):    -+ chi (e^{-2 i phi_1} a^2 + h.c.), after
  adjusting delta_a.

Each coupling has closed-form values in the Weak, Intermediate and
Strong drive regimes; branch +/- (or up/down for the squeeze) refers to
the dressed atomic state the atom is prepared in.  Also provided: the
conditional squeeze generator that entangles the atom with two
oppositely squeezed field states, the anti-Jaynes-Cummings coupling,
the pulsed JC/AJC schedule, and a numerical extractor that recovers the
static second-order generator of any harmonic Hamiltonian.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from . import algebra as al
from .errors import (AmbiguousResonanceError, ConfigurationError,
                     RegimeValidityError, SingularCouplingError,
                     SpaceMismatchError)
from .model import (MUCH_GREATER, SIMILAR_FACTOR, HarmonicHamiltonian,
                    Regime, _ratio_margin, classify_regime, regime_candidates)

PDC = "PDC"
PUC = "PUC"
SQUEEZE = "Squeeze"


@dataclass(frozen=True)
class EffectiveCoupling:
    """One engineered interaction with its strength and bookkeeping.

    coupling carries the full complex amplitude (branch sign and drive
    phases folded in).  residual_phase is the leftover oscillation
    frequency Phi of the PUC term; required_detuning is the delta_1
    (PDC) or delta_a (Squeeze) adjustment that makes the interaction
    resonant, and None for PUC, which needs no adjustment.
    """

    kind: str
    branch: str
    regime: str
    coupling: complex
    residual_phase: float = 0.0
    required_detuning: float = None


def _branch_sign(branch):
    signs = {"+": 1.0, "-": -1.0, "up": -1.0, "down": 1.0}
    if branch not in signs:
        raise ConfigurationError(f"unknown branch {branch!r}")
    return signs[branch]


def _resolve_regime(params, regime, strict=True):
    """Validate the requested regime tag (or classify when None)."""
    if regime is None:
        return classify_regime(params)
    tag = regime.tag if isinstance(regime, Regime) else str(regime)
    candidates = regime_candidates(params)
    if tag not in candidates:
        raise ConfigurationError(f"unknown regime tag {tag!r}")
    cand = candidates[tag]
    if strict and not cand.ok():
        raise RegimeValidityError(
            f"{tag} regime margins fail: {', '.join(cand.failed_labels())}",
            cand.margins)
    return cand


def pdc_coupling(params, branch, regime=None, strict=True):
    """Parametric down-conversion coupling Lambda and its delta_1 shift.

    Requires the symmetric detuning configuration delta_a = -delta_b =
    delta > 0.  Branch - negates both the coupling and the required
    detuning.  In the Intermediate regime the working point |Omega1| =
    |delta| is excluded (the neglected dressed transitions become
    resonant there) alongside the true denominator singularity
    delta^2 = 4 |Omega1|^2.
    """
    delta = params.delta_a
    if params.delta_b is None or not (delta > 0) or abs(params.delta_b + delta) > 1e-9 * max(1.0, delta):
        raise ConfigurationError(
            "PDC requires delta_a = -delta_b = delta > 0; got "
            f"delta_a={params.delta_a}, delta_b={params.delta_b}"
        )
    reg = _resolve_regime(params, regime, strict)
    s = _branch_sign(branch)
    lt = params.lambda_tilde_a * params.lambda_tilde_b
    mag2 = abs(params.lambda_tilde_a) ** 2 + abs(params.lambda_tilde_b) ** 2
    om = params.Omega1_mag

    if reg.tag == "Weak":
        lam = s * lt * om / delta ** 2
        d1 = s * mag2 * om / delta ** 2
    elif reg.tag == "Intermediate":
        if abs(om - delta) <= 1e-9 * max(om, delta):
            raise SingularCouplingError(
                "Intermediate PDC is invalid at |Omega1| = |delta|")
        den = delta ** 2 - 4.0 * om ** 2
        if abs(den) <= 1e-12 * max(delta ** 2, 4 * om ** 2):
            raise SingularCouplingError(
                "Intermediate PDC denominator delta^2 - 4 Omega1^2 vanishes")
        lam = s * lt * om / den
        d1 = s * mag2 * om / (4.0 * om ** 2 - delta ** 2)
    elif reg.tag == "Strong":
        if om == 0:
            raise SingularCouplingError("Strong PDC requires Omega1 > 0")
        lam = -s * lt / (4.0 * om)
        d1 = s * mag2 / (4.0 * om)
    else:
        raise ConfigurationError(f"unknown regime tag {reg.tag!r}")

    return EffectiveCoupling(kind=PDC, branch=branch, regime=reg.tag,
                             coupling=complex(lam), required_detuning=float(d1))


def puc_coupling(params, branch, regime=None, strict=True):
    """Photon up-conversion coupling Sigma and residual phase Phi.

    Requires similar-magnitude, nonzero mode detunings.  No detuning
    adjustment is needed; the leftover oscillation Phi vanishes only for
    symmetric parameters (identical couplings and detunings) or in the
    Intermediate regime by parameter tuning.
    """
    da, db = params.delta_a, params.delta_b
    if db is None or da == 0 or db == 0:
        raise ConfigurationError(
            f"PUC requires two modes with nonzero detunings; got {da}, {db}")
    hi, lo = max(abs(da), abs(db)), min(abs(da), abs(db))
    if hi / lo > SIMILAR_FACTOR:
        raise ConfigurationError(
            f"PUC requires delta_a ~ delta_b (factor {SIMILAR_FACTOR}); "
            f"got {da}, {db}")
    reg = _resolve_regime(params, regime, strict)
    s = _branch_sign(branch)
    lt = params.lambda_tilde_a * np.conj(params.lambda_tilde_b)
    om = params.Omega1_mag

    if reg.tag == "Weak":
        sigma = lt * (da - db) / (2.0 * da * db)
    elif reg.tag == "Intermediate":
        den = 4.0 * om ** 2 - da * db
        if abs(den) <= 1e-12 * max(4 * om ** 2, abs(da * db)):
            raise SingularCouplingError(
                "Intermediate PUC denominator 4 Omega1^2 - delta_a delta_b vanishes")
        sigma = s * lt * om / den
    elif reg.tag == "Strong":
        if om == 0:
            raise SingularCouplingError("Strong PUC requires Omega1 > 0")
        sigma = s * lt / (4.0 * om)
    else:
        raise ConfigurationError(f"unknown regime tag {reg.tag!r}")

    la2 = abs(params.lambda_tilde_a) ** 2
    lb2 = abs(params.lambda_tilde_b) ** 2
    den_a = 4.0 * om ** 2 - da ** 2
    den_b = 4.0 * om ** 2 - db ** 2
    if den_a == 0 or den_b == 0:
        raise SingularCouplingError("PUC phase denominator 4 Omega1^2 - delta^2 vanishes")
    phi = s * om * (lb2 / den_b - la2 / den_a) + da - db

    return EffectiveCoupling(kind=PUC, branch=branch, regime=reg.tag,
                             coupling=complex(sigma), residual_phase=float(phi),
                             required_detuning=None)


def squeeze_coupling(params, branch, strict=True):
    """Single-mode squeeze coupling chi and the delta_a adjustment.

    chi = |lambda~_a|^2 / (4 |Omega2|); the coupling amplitude is
    -+ chi e^{-2 i phi_1} for branch up/down and the required detuning
    is delta_a = -+ 2 |lambda~_a|^2 / |Omega2|.  Preconditions: delta_1
    = 0, delta_2 < 0 with |Omega1| = -delta_2/2, and the hierarchy
    |Omega1| >> |lambda~_a|, |Omega2|, |delta_a| with |delta_a| <<
    |Omega2|.
    """
    if branch not in ("up", "down"):
        raise ConfigurationError(f"squeeze branch must be up/down, got {branch!r}")
    if params.Omega2_mag == 0:
        raise SingularCouplingError("squeeze coupling requires a second drive")
    if abs(params.delta1) > 1e-12 * max(1.0, params.Omega1_mag):
        raise ConfigurationError(f"squeeze derivation needs delta_1 = 0, got {params.delta1}")
    if not params.delta2 < 0:
        raise ConfigurationError(f"squeeze derivation needs delta_2 < 0, got {params.delta2}")
    target = -params.delta2 / 2.0
    if abs(params.Omega1_mag - target) > 1e-9 * max(1.0, target):
        raise ConfigurationError(
            f"|Omega1| must equal -delta_2/2 = {target}, got {params.Omega1_mag}")

    la = abs(params.lambda_tilde_a)
    margins = [
        _ratio_margin("|Omega1| >> lambda_a", params.Omega1_mag, la, MUCH_GREATER),
        _ratio_margin("|Omega1| >> |Omega2|", params.Omega1_mag,
                      params.Omega2_mag, MUCH_GREATER),
        _ratio_margin("|Omega1| >> |delta_a|", params.Omega1_mag,
                      abs(params.delta_a), MUCH_GREATER),
        _ratio_margin("|Omega2| >> |delta_a|", params.Omega2_mag,
                      abs(params.delta_a), MUCH_GREATER),
    ]
    bad = [m[0] for m in margins if not m[2]]
    if strict and bad:
        raise RegimeValidityError(
            f"squeeze hierarchy fails: {', '.join(bad)}", margins)

    sign = -1.0 if branch == "up" else 1.0
    chi = la ** 2 / (4.0 * params.Omega2_mag)
    coupling = sign * chi * cmath.exp(-2j * params.phi1)
    required = sign * 2.0 * la ** 2 / params.Omega2_mag
    return EffectiveCoupling(kind=SQUEEZE, branch=branch, regime="Strong",
                             coupling=coupling, required_detuning=required)


def build_effective_hamiltonian(coupling, space):
    """Field-only harmonic Hamiltonian realizing an EffectiveCoupling.

    PDC: static coupling*ab + h.c.; PUC: coupling*ab^dag oscillating at
    the residual phase; Squeeze: static coupling*a^2 + h.c.  An atom
    factor in the space, if present, is left untouched (the atom is a
    spectator once the branch is chosen).
    """
    if not space.has("a"):
        raise SpaceMismatchError("effective Hamiltonian needs mode 'a'")
    a = al.mode_annihilation(space, "a")
    if coupling.kind == SQUEEZE:
        term = (a @ a, coupling.coupling, 0.0)
    else:
        if not space.has("b"):
            raise SpaceMismatchError(f"{coupling.kind} needs mode 'b'")
        b = al.mode_annihilation(space, "b")
        if coupling.kind == PDC:
            term = (a @ b, coupling.coupling, 0.0)
        elif coupling.kind == PUC:
            term = (a @ b.dagger(), coupling.coupling, coupling.residual_phase)
        else:
            raise ConfigurationError(f"unknown effective kind {coupling.kind!r}")
    return HarmonicHamiltonian(space, [term], hermitian_closure=True)


def build_sss_hamiltonian(params, space):
    """Atom-conditioned squeeze generator (squeezed-superposition states).

    H = -chi [2 a^dag a + a^2 + (a^dag)^2] (sigma_ee - sigma_gg), valid
    at delta_a = phi_1 = phi_2 = 0: the two atomic levels see opposite
    squeeze directions, so a superposed atom entangles with two
    oppositely squeezed field components.
    """
    for name, val in (("delta_a", params.delta_a), ("phi1", params.phi1),
                      ("phi2", params.phi2)):
        if abs(val) > 1e-12:
            raise ConfigurationError(f"SSS generator requires {name} = 0, got {val}")
    if params.Omega2_mag == 0:
        raise SingularCouplingError("SSS generator requires a second drive")
    chi = params.lambda_a ** 2 / (4.0 * params.Omega2_mag)
    a = al.mode_annihilation(space, "a")
    sz = al.atom_transition(space, "e", "e") - al.atom_transition(space, "g", "g")
    field = (a.dagger() @ a) * 2.0 + a @ a + a.dagger() @ a.dagger()
    op = (field @ sz) * (-chi)
    return HarmonicHamiltonian(space, [(op, 0.5, 0.0)], hermitian_closure=True)


def ajc_validity_margins(params):
    """Margins for the anti-Jaynes-Cummings condition set.

    Hierarchy |Omega1| >> |Omega2|, lambda_a, |delta_a| plus the
    rotating-wave condition |Omega2| >> |lambda~_a| for dropping the
    co-rotating JC term.
    """
    la = abs(params.lambda_tilde_a)
    return [
        _ratio_margin("|Omega1| >> |Omega2|", params.Omega1_mag,
                      params.Omega2_mag, MUCH_GREATER),
        _ratio_margin("|Omega1| >> lambda_a", params.Omega1_mag, la, MUCH_GREATER),
        _ratio_margin("|Omega1| >> |delta_a|", params.Omega1_mag,
                      abs(params.delta_a), MUCH_GREATER),
        _ratio_margin("|Omega2| >> lambda_a", params.Omega2_mag, la, MUCH_GREATER),
    ]


def build_ajc_hamiltonian(params, space, strict=True):
    """Anti-Jaynes-Cummings coupling lambda~_a a sigma_ge + h.c.

    Pair creation/annihilation |g,n> <-> |e,n+1>, engineered at phi_1 =
    phi_2 = 0 and delta_a = -|Omega2| under the usual two-drive setup
    (delta_1 = 0, delta_2 < 0, |Omega1| = -delta_2/2).
    """
    for name, val in (("phi1", params.phi1), ("phi2", params.phi2)):
        if abs(val) > 1e-12:
            raise ConfigurationError(f"AJC requires {name} = 0, got {val}")
    if abs(params.delta_a + params.Omega2_mag) > 1e-9 * max(1.0, params.Omega2_mag):
        raise ConfigurationError(
            f"AJC requires delta_a = -|Omega2|; got delta_a={params.delta_a}, "
            f"|Omega2|={params.Omega2_mag}")
    if abs(params.delta1) > 1e-12 * max(1.0, params.Omega1_mag):
        raise ConfigurationError(f"AJC requires delta_1 = 0, got {params.delta1}")
    margins = ajc_validity_margins(params)
    if strict and any(not m[2] for m in margins):
        bad = [m[0] for m in margins if not m[2]]
        raise RegimeValidityError(f"AJC hierarchy fails: {', '.join(bad)}", margins)
    a = al.mode_annihilation(space, "a")
    s_ge = al.atom_transition(space, "e", "g")
    return HarmonicHamiltonian(
        space, [(a @ s_ge, params.lambda_tilde_a, 0.0)], hermitian_closure=True)


def _jc_hamiltonian(params, space):
    a = al.mode_annihilation(space, "a")
    s_eg = al.atom_transition(space, "g", "e")
    return HarmonicHamiltonian(
        space, [(a @ s_eg, params.lambda_tilde_a, 0.0)], hermitian_closure=True)


@dataclass(frozen=True)
class PulseSchedule:
    """Alternating AJC/JC pulse windows of equal duration tau.

    Cycle n covers [2 n tau, (2n+1) tau) with the AJC coupling (window
    l=1) and [(2n+1) tau, (2n+2) tau) with the JC coupling (window
    l=2); n_cycles cycles tile [0, 2 n_cycles tau).
    """

    tau: float
    n_cycles: int

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigurationError(f"tau must be > 0, got {self.tau}")
        if self.n_cycles < 0 or int(self.n_cycles) != self.n_cycles:
            raise ConfigurationError(f"n_cycles must be a non-negative int, got {self.n_cycles}")

    @property
    def total_time(self):
        return 2.0 * self.n_cycles * self.tau

    def windows(self):
        out = []
        for n in range(self.n_cycles):
            out.append((2 * n * self.tau, (2 * n + 1) * self.tau, "AJC"))
            out.append(((2 * n + 1) * self.tau, (2 * n + 2) * self.tau, "JC"))
        return out


class PiecewiseHamiltonian:
    """Sequence of harmonic Hamiltonians active on adjacent windows.

    Outside the scheduled windows the generator is zero (free
    evolution).  Integrators align their steps to the window edges.
    """

    def __init__(self, space, segments):
        self.space = space
        self.segments = []
        prev_end = None
        for t0, t1, h in segments:
            if t1 <= t0:
                raise ConfigurationError(f"empty window [{t0}, {t1})")
            if prev_end is not None and t0 < prev_end - 1e-12:
                raise ConfigurationError("overlapping windows in schedule")
            if h.space != space:
                raise SpaceMismatchError("segment Hamiltonian on a different space")
            self.segments.append((float(t0), float(t1), h))
            prev_end = t1

    def boundaries(self):
        edges = set()
        for t0, t1, _ in self.segments:
            edges.add(t0)
            edges.add(t1)
        return sorted(edges)

    def segment_at(self, t):
        """Active Hamiltonian at time t, or None during free evolution."""
        for t0, t1, h in self.segments:
            if t0 - 1e-15 <= t < t1 - 1e-15:
                return h
        return None

    def evaluate(self, t):
        h = self.segment_at(t)
        if h is None:
            d = self.space.total_dim
            return np.zeros((d, d), dtype=np.complex128)
        return h.evaluate(t)

    def max_frequency(self):
        return max((h.max_frequency() for _, _, h in self.segments), default=0.0)


def build_pulsed_jc_ajc(params, schedule, space, strict=True):
    """Piecewise generator alternating AJC (window 1) and JC (window 2).

    With lambda~_a tau = pi/2 the first AJC window maps |g,0> to |e,1>
    (up to phase) and the following JC window transfers it to |g,2> at
    rate lambda~_a sqrt(2).
    """
    ajc = build_ajc_hamiltonian(params, space, strict=strict)
    jc = _jc_hamiltonian(params, space)
    segs = []
    for t0, t1, which in schedule.windows():
        segs.append((t0, t1, ajc if which == "AJC" else jc))
    return PiecewiseHamiltonian(space, segs)


@dataclass(frozen=True)
class ExtractedGenerator:
    """Result of the numerical second-order extraction."""

    operator: "al.Operator"
    residue: float
    resonant_pairs: int
    window: float
    samples: int


def derive_effective_numeric(h, window, samples=64, resonance_tol=1e-9,
                             static_allowed=False):
    """Static second-order generator of a harmonic Hamiltonian.

    Expands H(t) = sum_k e^{i w_k t} M_k (closure applied) and keeps the
    non-oscillating pairs of -i H(t) integral_0^t H(t') dt': every pair
    with w_k + w_l = 0 (within ``resonance_tol``) contributes
    -M_k M_l / w_l.  Pair sums smaller in magnitude than 10/window but
    not resonant cannot be averaged over the window and raise an
    ambiguous-resonance error.  The discarded oscillatory part is
    sampled over the window and its largest matrix element reported as
    the residue.

    Terms at zero frequency are rejected unless ``static_allowed``;
    when allowed they are passed through to first order and excluded
    from the pair accumulation.
    """
    if window <= 0:
        raise ConfigurationError(f"window must be > 0, got {window}")
    freqs, mats = h.expanded_terms()
    d = h.space.total_dim
    static = np.zeros((d, d), dtype=np.complex128)
    osc_f, osc_m = [], []
    for f, m in zip(freqs, mats):
        if abs(f) <= resonance_tol:
            if not static_allowed:
                raise ConfigurationError(
                    "input has a zero-frequency term; pass static_allowed=True "
                    "to carry it through at first order")
            static += m
        else:
            osc_f.append(f)
            osc_m.append(m)

    band = 10.0 / window
    eff = static.copy()
    pairs = 0
    residual_terms = []
    for k, (fk, mk) in enumerate(zip(osc_f, osc_m)):
        for l, (fl, ml) in enumerate(zip(osc_f, osc_m)):
            s = fk + fl
            if abs(s) <= resonance_tol:
                eff += -(mk @ ml) / fl
                pairs += 1
                # its companion oscillation at w_k never averages to zero
                residual_terms.append((fk, (mk @ ml) / fl))
            else:
                if abs(s) < band:
                    raise AmbiguousResonanceError(
                        f"pair frequency sum {s:.3e} is below the averaging "
                        f"band 10/window = {band:.3e}; widen the window or "
                        "reclassify the pair as resonant")
                residual_terms.append((s, -(mk @ ml) / fl))
                residual_terms.append((fk, (mk @ ml) / fl))

    residue = 0.0
    if residual_terms and samples > 0:
        ts = np.linspace(0.0, window, samples)
        rfreqs = np.array([f for f, _ in residual_terms])
        rmats = np.array([m for _, m in residual_terms])
        for t in ts:
            phases = np.exp(1j * rfreqs * t)
            dev = np.tensordot(phases, rmats, axes=1)
            residue = max(residue, float(np.max(np.abs(dev))))

    op = al.Operator(h.space, eff)
    return ExtractedGenerator(operator=op, residue=residue,
                              resonant_pairs=pairs, window=float(window),
                              samples=int(samples))
