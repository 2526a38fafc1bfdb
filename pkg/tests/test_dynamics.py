"""Propagation: fixed and adaptive stepping, accuracy gates, Lindblad
dissipators, and frame bookkeeping."""

import math

import numpy as np
import pytest

from cavqed import algebra as al
from cavqed.dynamics import (FRAME_INSENSITIVE_COLUMNS, IntegratorConfig,
                             align_frames, check_frame_comparison,
                             evolve_lindblad, evolve_schrodinger)
from cavqed.errors import (ConfigurationError, NumericalFailure,
                           SpaceMismatchError)
from cavqed.model import HarmonicHamiltonian, build_space
from cavqed.observables import (atom_excited_population, basis_population,
                                min_quadrature_variance, photon_number)


def _number_h(sp, omega=1.0):
    a = al.mode_annihilation(sp, "a")
    return HarmonicHamiltonian(sp, [(a.dagger() @ a, omega / 2.0, 0.0)])


def _ajc_h(sp, lam=1.0):
    a = al.mode_annihilation(sp, "a")
    s_ge = al.atom_transition(sp, "e", "g")
    return HarmonicHamiltonian(sp, [(a @ s_ge, lam, 0.0)])


def _grid(t_end, n=5):
    return np.linspace(0.0, t_end, n)


def test_integrator_config_validation():
    with pytest.raises(ConfigurationError):
        IntegratorConfig(method="euler")
    with pytest.raises(ConfigurationError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ConfigurationError):
        IntegratorConfig().grid()
    with pytest.raises(ConfigurationError):
        IntegratorConfig(t_grid=[0.0, 1.0, 0.5]).grid()


def test_zero_hamiltonian_is_identity():
    sp = build_space(4)
    h = HarmonicHamiltonian(sp, [])
    psi0 = al.product_state(sp, {"a": 2, "atom": "e"})
    traj = evolve_schrodinger(h, psi0, IntegratorConfig(dt=0.1,
                                                        t_grid=_grid(3.0)))
    for st in traj.states:
        assert np.array_equal(st.data, psi0.data)
    assert np.all(traj.diagnostics["norm_drift"] == 0.0)


def test_eigenstate_acquires_pure_phase():
    sp = build_space(5, atom=False)
    omega = 2.3
    h = _number_h(sp, omega)
    psi0 = al.product_state(sp, {"a": 1})
    traj = evolve_schrodinger(h, psi0, IntegratorConfig(dt=1e-3,
                                                        t_grid=_grid(2.0)))
    for t, st in zip(traj.times, traj.states):
        amp = st.data[1]
        assert abs(abs(amp) - 1.0) < 1e-10
        assert abs(amp - np.exp(-1j * omega * t)) < 1e-9


def test_static_energy_conserved():
    rng = np.random.default_rng(5)
    sp = build_space(6)
    d = sp.total_dim
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    herm = al.Operator(sp, (m + m.conj().T) / 4.0)
    h = HarmonicHamiltonian(sp, [(herm, 0.5, 0.0)])
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi0 = al.State.from_vector(sp, v / np.linalg.norm(v))
    traj = evolve_schrodinger(h, psi0, IntegratorConfig(dt=2e-3,
                                                        t_grid=_grid(4.0)))
    energies = traj.expectations(herm).real
    assert np.max(np.abs(energies - energies[0])) < 1e-8 * abs(energies[0])


def test_norm_gate_suggests_smaller_step():
    sp = build_space(8, atom=False)
    h = _number_h(sp, 5.0)
    psi0 = al.product_state(sp, {"a": 7})
    cfg = IntegratorConfig(dt=0.2, t_grid=_grid(4.0))
    with pytest.raises(NumericalFailure) as exc:
        evolve_schrodinger(h, psi0, cfg)
    msg = str(exc.value)
    assert "retry with dt" in msg
    suggested = float(msg.rsplit("dt <=", 1)[1].split(";")[0])
    assert suggested < 0.2
    retry = IntegratorConfig(dt=suggested, t_grid=_grid(4.0))
    traj = evolve_schrodinger(h, psi0, retry)
    assert np.max(traj.diagnostics["norm_drift"]) <= 1e-6


def test_renormalize_keeps_unit_norm():
    sp = build_space(8, atom=False)
    h = _number_h(sp, 5.0)
    psi0 = al.product_state(sp, {"a": 7})
    cfg = IntegratorConfig(dt=1e-3, t_grid=_grid(4.0), renormalize=True)
    traj = evolve_schrodinger(h, psi0, cfg)
    drift = np.max(traj.diagnostics["norm_drift"])
    assert 0.0 < drift <= 1e-6  # inside the gate, so propagation continues
    for st in traj.states:
        assert abs(np.linalg.norm(st.data) - 1.0) < 1e-14


def test_coarse_step_warns_about_cycle_resolution():
    sp = build_space(3)
    a = al.mode_annihilation(sp, "a")
    s_eg = al.atom_transition(sp, "g", "e")
    h = HarmonicHamiltonian(sp, [(a @ s_eg, 0.01, 50.0)])
    cfg = IntegratorConfig(dt=0.05, t_grid=_grid(1.0))  # ~2.5 steps/cycle
    with pytest.warns(RuntimeWarning, match="steps per cycle"):
        evolve_schrodinger(h, al.vacuum_state(sp), cfg)


def test_default_step_resolves_fastest_frequency():
    sp = build_space(3)
    a = al.mode_annihilation(sp, "a")
    s_eg = al.atom_transition(sp, "g", "e")
    h = HarmonicHamiltonian(sp, [(a @ s_eg, 1.0, 10.0)])
    cfg = IntegratorConfig(t_grid=_grid(2.0))  # dt left to the frequency rule
    traj = evolve_schrodinger(h, al.vacuum_state(sp), cfg)
    assert np.max(traj.diagnostics["norm_drift"]) < 1e-6


def test_adaptive_matches_fixed_on_squeezing():
    sp = build_space(16, atom=False)
    a = al.mode_annihilation(sp, "a")
    h = HarmonicHamiltonian(sp, [(a @ a, 0.0125, 0.0)])
    psi0 = al.vacuum_state(sp)
    grid = _grid(12.0, 4)
    fixed = evolve_schrodinger(h, psi0, IntegratorConfig(dt=0.01, t_grid=grid))
    adapt = evolve_schrodinger(
        h, psi0, IntegratorConfig(method="RK-adaptive", t_grid=grid))
    for sf, sa in zip(fixed.states, adapt.states):
        vf = min_quadrature_variance(sf, "a").var_min
        va = min_quadrature_variance(sa, "a").var_min
        assert vf == pytest.approx(va, abs=1e-6)


def test_rk4_convergence_order():
    sp = build_space(3)
    h = _ajc_h(sp)
    psi0 = al.vacuum_state(sp)
    t_end = 1.3
    exact = math.sin(t_end) ** 2

    def endpoint_error(dt):
        cfg = IntegratorConfig(dt=dt, t_grid=np.array([0.0, t_end]))
        traj = evolve_schrodinger(h, psi0, cfg)
        p = basis_population(traj.final_state, {"a": 1, "atom": "e"})
        return abs(p - exact)

    e_coarse = endpoint_error(0.04)
    e_fine = endpoint_error(0.02)
    ratio = e_coarse / e_fine
    assert 10.0 < ratio < 24.0  # fourth order: ~16


def test_lindblad_atom_decay_law():
    sp = build_space(2)
    h = HarmonicHamiltonian(sp, [])
    rho0 = al.product_state(sp, {"atom": "e"}).as_mixed()
    gamma = 0.1
    grid = np.linspace(0.0, 1.0 / gamma, 6)
    cfg = IntegratorConfig(dt=0.05, t_grid=grid)
    traj = evolve_lindblad(h, rho0, 0.0, gamma, cfg)
    for t, st in zip(traj.times, traj.states):
        assert atom_excited_population(st) == pytest.approx(
            math.exp(-gamma * t), abs=1e-6)
    assert atom_excited_population(traj.final_state) == pytest.approx(
        0.367879, abs=1e-6)


def test_lindblad_cavity_decay_law():
    sp = build_space(4, atom=False)
    h = HarmonicHamiltonian(sp, [])
    rho0 = al.product_state(sp, {"a": 1}).as_mixed()
    gamma = 0.2
    grid = np.linspace(0.0, 8.0, 5)
    traj = evolve_lindblad(h, rho0, gamma, 0.0,
                           IntegratorConfig(dt=0.05, t_grid=grid))
    for t, st in zip(traj.times, traj.states):
        assert photon_number(st, "a") == pytest.approx(
            math.exp(-gamma * t), abs=1e-8)


def test_lindblad_matches_schrodinger_without_decay():
    sp = build_space(4)
    h = _ajc_h(sp)
    psi0 = al.vacuum_state(sp)
    grid = _grid(3.0, 7)
    cfg = IntegratorConfig(dt=2e-3, t_grid=grid)
    pure = evolve_schrodinger(h, psi0, cfg)
    mixed = evolve_lindblad(h, psi0.as_mixed(), 0.0, 0.0, cfg)
    assert mixed.kind == "mixed"
    for sp_, sm in zip(pure.states, mixed.states):
        assert photon_number(sp_, "a") == pytest.approx(
            photon_number(sm, "a"), abs=1e-8)
        assert atom_excited_population(sp_) == pytest.approx(
            atom_excited_population(sm), abs=1e-8)


def test_lindblad_diagnostics_and_eigencheck_sampling():
    sp = build_space(3)
    h = _ajc_h(sp)
    rho0 = al.vacuum_state(sp).as_mixed()
    grid = np.linspace(0.0, 1.0, 120)
    traj = evolve_lindblad(h, rho0, 1e-3, 1e-3,
                           IntegratorConfig(dt=1e-3, t_grid=grid))
    diag = traj.diagnostics
    assert np.max(diag["trace_drift"]) <= 1e-8
    assert np.max(diag["herm_drift"]) <= 1e-10
    checked = np.isfinite(diag["min_eigenvalue"])
    assert checked.sum() == 50  # capped eigencheck schedule
    assert np.nanmin(diag["min_eigenvalue"]) >= -1e-8


def test_lindblad_rejects_unphysical_input():
    sp = build_space(2, atom=False)
    h = HarmonicHamiltonian(sp, [])
    cfg = IntegratorConfig(dt=0.1, t_grid=_grid(0.5, 2))
    skew = np.array([[1.0, 0.2], [0.0, 0.0]], dtype=np.complex128)
    with pytest.raises(NumericalFailure, match="Hermiticity"):
        evolve_lindblad(h, al.State.from_density(sp, skew), 0.0, 0.0, cfg)
    indefinite = np.diag([1.5, -0.5]).astype(np.complex128)
    with pytest.raises(NumericalFailure, match="eigenvalue"):
        evolve_lindblad(h, al.State.from_density(sp, indefinite), 0.0, 0.0, cfg)


def test_collapse_operator_requirements():
    cfg = IntegratorConfig(dt=0.1, t_grid=_grid(0.5, 2))
    atom_only = al.space_of(al.Atom())
    h_atom = HarmonicHamiltonian(atom_only, [])
    with pytest.raises(ConfigurationError):
        evolve_lindblad(h_atom, al.vacuum_state(atom_only), 0.1, 0.0, cfg)
    no_atom = build_space(3, atom=False)
    h_mode = HarmonicHamiltonian(no_atom, [])
    with pytest.raises(ConfigurationError):
        evolve_lindblad(h_mode, al.vacuum_state(no_atom), 0.0, 0.1, cfg)
    with pytest.raises(ConfigurationError):
        evolve_lindblad(h_mode, al.vacuum_state(no_atom), -0.1, 0.0, cfg)


def test_adaptive_lindblad_consistency():
    sp = build_space(3)
    h = _ajc_h(sp)
    rho0 = al.vacuum_state(sp).as_mixed()
    grid = _grid(2.0, 3)
    fixed = evolve_lindblad(h, rho0, 5e-3, 1e-3,
                            IntegratorConfig(dt=1e-3, t_grid=grid))
    adapt = evolve_lindblad(h, rho0, 5e-3, 1e-3,
                            IntegratorConfig(method="RK-adaptive", t_grid=grid))
    diff = np.max(np.abs(fixed.final_state.data - adapt.final_state.data))
    assert diff < 1e-8


def test_input_validation():
    sp = build_space(3)
    h = _ajc_h(sp)
    cfg = IntegratorConfig(dt=0.1, t_grid=_grid(1.0))
    with pytest.raises(ConfigurationError):
        evolve_schrodinger(h, al.vacuum_state(sp).as_mixed(), cfg)
    other = build_space(4)
    with pytest.raises(SpaceMismatchError):
        evolve_schrodinger(h, al.vacuum_state(other), cfg)
    zero = al.State.from_vector(sp, np.zeros(sp.total_dim))
    with pytest.raises(ConfigurationError):
        evolve_schrodinger(h, zero, cfg)


def test_frame_annotation_and_comparison_policy():
    sp = build_space(3)
    traj = evolve_schrodinger(HarmonicHamiltonian(sp, []), al.vacuum_state(sp),
                              IntegratorConfig(dt=0.1, t_grid=_grid(0.5, 2)))
    tagged = align_frames(traj, "interaction-picture")
    assert tagged.frame == "interaction-picture"
    with pytest.raises(ConfigurationError):
        align_frames(traj, "")
    # same frame: anything goes
    check_frame_comparison("laser", "laser", ["theta_min", "n_a"])
    # cross-frame: only the insensitive set
    check_frame_comparison("laser", "interaction-picture",
                           ["n_a", "var_x_min", "purity"])
    with pytest.raises(ConfigurationError):
        check_frame_comparison("laser", "interaction-picture", ["theta_min"])
    assert "theta_min" not in FRAME_INSENSITIVE_COLUMNS
