"""Pure-numpy fixed-step RK4 kernels.

Drop-in fallback for the numba kernels with the identical call
signatures and step-for-step identical arithmetic intent (same RK4
tableau, same Hermitian-difference form of the commutator).  Useful
where numba is unavailable and as an independent cross-check.
"""

import numpy as np

NAME = "numpy"


def _schrodinger_rhs(psi, t, freqs, mats):
    phases = -1j * np.exp(1j * freqs * t)
    return phases @ (mats @ psi)


def schrodinger_rk4(psi0, t0, dt, nsteps, freqs, mats):
    psi = psi0.copy()
    for s in range(nsteps):
        t = t0 + s * dt
        k1 = _schrodinger_rhs(psi, t, freqs, mats)
        k2 = _schrodinger_rhs(psi + 0.5 * dt * k1, t + 0.5 * dt, freqs, mats)
        k3 = _schrodinger_rhs(psi + 0.5 * dt * k2, t + 0.5 * dt, freqs, mats)
        k4 = _schrodinger_rhs(psi + dt * k3, t + dt, freqs, mats)
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def _lindblad_rhs(rho, t, freqs, mats, cops, rates, cdagc_diag):
    phases = np.exp(1j * freqs * t)
    H = np.tensordot(phases, mats, axes=1)
    M = H @ rho
    out = -1j * (M - M.conj().T)
    for c in range(cops.shape[0]):
        g = rates[c]
        if g == 0.0:
            continue
        L = cops[c]
        diag = cdagc_diag[c]
        out += g * ((L @ rho) @ L.conj().T
                    - 0.5 * (diag[:, None] * rho + rho * diag[None, :]))
    return out


def lindblad_rk4(rho0, t0, dt, nsteps, freqs, mats, cops, rates, cdagc_diag):
    rho = rho0.copy()
    for s in range(nsteps):
        t = t0 + s * dt
        k1 = _lindblad_rhs(rho, t, freqs, mats, cops, rates, cdagc_diag)
        k2 = _lindblad_rhs(rho + 0.5 * dt * k1, t + 0.5 * dt,
                           freqs, mats, cops, rates, cdagc_diag)
        k3 = _lindblad_rhs(rho + 0.5 * dt * k2, t + 0.5 * dt,
                           freqs, mats, cops, rates, cdagc_diag)
        k4 = _lindblad_rhs(rho + dt * k3, t + dt,
                           freqs, mats, cops, rates, cdagc_diag)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho
