"""Kernel backend selection and cross-backend agreement."""

import numpy as np
import pytest

from cavqed import algebra as al
from cavqed.backends import available_backends, get_kernels
from cavqed.dynamics import IntegratorConfig, evolve_schrodinger
from cavqed.errors import ConfigurationError
from cavqed.model import HarmonicHamiltonian, build_space
from cavqed.observables import photon_number

HAVE_NUMBA = "numba" in available_backends()


def _problem(dim=12, seed=7):
    """Random Hermitian-closed harmonic decomposition plus states."""
    rng = np.random.default_rng(seed)
    freqs = np.empty(4)
    mats = np.empty((4, dim, dim), dtype=np.complex128)
    for k in range(2):
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal(
            (dim, dim))
        m *= 0.05 / dim
        f = rng.uniform(0.5, 5.0)
        freqs[2 * k], mats[2 * k] = f, m
        freqs[2 * k + 1], mats[2 * k + 1] = -f, m.conj().T
    psi0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi0 /= np.linalg.norm(psi0)
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(np.complex128)
    cops = a[None, :, :]
    rates = np.array([0.05])
    cdagc = np.real(np.diag(a.conj().T @ a))[None, :].copy()
    return freqs, mats, psi0, cops, rates, cdagc


def test_available_backends_always_has_numpy():
    names = available_backends()
    assert "numpy" in names
    if HAVE_NUMBA:
        assert names[0] == "numba"  # preferred default when importable


def test_get_kernels_selection(monkeypatch):
    monkeypatch.delenv("CAVQED_BACKEND", raising=False)
    assert get_kernels("numpy").NAME == "numpy"
    default = get_kernels(None)
    assert default.NAME == ("numba" if HAVE_NUMBA else "numpy")
    with pytest.raises(ConfigurationError, match="unknown backend"):
        get_kernels("fortran")
    monkeypatch.setenv("CAVQED_BACKEND", "numpy")
    assert get_kernels(None).NAME == "numpy"
    # an explicit name wins over the environment
    if HAVE_NUMBA:
        assert get_kernels("numba").NAME == "numba"
        monkeypatch.setenv("CAVQED_BACKEND", "NumPy")  # case-insensitive
        assert get_kernels(None).NAME == "numpy"


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend unavailable")
def test_backends_agree_on_pure_states():
    freqs, mats, psi0, *_ = _problem()
    out = {}
    for name in ("numba", "numpy"):
        kern = get_kernels(name)
        out[name] = kern.schrodinger_rk4(psi0.copy(), 0.0, 1e-3, 400,
                                         freqs, mats)
    assert np.max(np.abs(out["numba"] - out["numpy"])) < 1e-12


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend unavailable")
def test_backends_agree_on_density_matrices():
    freqs, mats, psi0, cops, rates, cdagc = _problem()
    rho0 = np.outer(psi0, psi0.conj())
    out = {}
    for name in ("numba", "numpy"):
        kern = get_kernels(name)
        out[name] = kern.lindblad_rk4(rho0.copy(), 0.0, 1e-3, 200,
                                      freqs, mats, cops, rates, cdagc)
    assert np.max(np.abs(out["numba"] - out["numpy"])) < 1e-12


@pytest.mark.parametrize("name", ["numpy"] + (["numba"] if HAVE_NUMBA else []))
def test_same_backend_is_bit_stable(name):
    freqs, mats, psi0, *_ = _problem()
    kern = get_kernels(name)
    one = kern.schrodinger_rk4(psi0.copy(), 0.0, 1e-3, 200, freqs, mats)
    two = kern.schrodinger_rk4(psi0.copy(), 0.0, 1e-3, 200, freqs, mats)
    assert np.array_equal(one, two)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend unavailable")
def test_integrator_backend_knob_changes_nothing_physical():
    sp = build_space(10, atom=False)
    a = al.mode_annihilation(sp, "a")
    h = HarmonicHamiltonian(sp, [(a @ a, 0.0125, 0.0)])
    psi0 = al.vacuum_state(sp)
    grid = np.linspace(0.0, 8.0, 3)
    runs = {}
    for name in ("numba", "numpy"):
        cfg = IntegratorConfig(dt=0.01, t_grid=grid, backend=name)
        runs[name] = evolve_schrodinger(h, psi0, cfg)
    for sa, sb in zip(runs["numba"].states, runs["numpy"].states):
        assert abs(photon_number(sa, "a") - photon_number(sb, "a")) < 1e-12
