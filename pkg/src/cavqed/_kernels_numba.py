"""Numba-compiled fixed-step RK4 kernels.

Both kernels take the harmonic decomposition H(t) = sum_k e^{i f_k t}
M_k as parallel arrays (freqs, mats) and advance ``nsteps`` steps of
size ``dt`` from ``t0``.  The Lindblad kernel additionally takes the
collapse operators, their rates, and the precomputed diagonals of
L^dag L (all our collapse operators have diagonal L^dag L, which turns
the anticommutator into row/column scaling).  The commutator is formed
as -i(M - M^dag) with M = H rho, which keeps every RK4 stage exactly
Hermitian-preserving.
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _schrodinger_rhs(psi, t, freqs, mats, out):
    d = psi.shape[0]
    for i in range(d):
        out[i] = 0.0j
    for k in range(freqs.shape[0]):
        ph = -1j * np.exp(1j * freqs[k] * t)
        y = np.dot(mats[k], psi)
        for i in range(d):
            out[i] += ph * y[i]


@njit(cache=True)
def schrodinger_rk4(psi0, t0, dt, nsteps, freqs, mats):
    d = psi0.shape[0]
    psi = psi0.copy()
    k1 = np.empty(d, np.complex128)
    k2 = np.empty(d, np.complex128)
    k3 = np.empty(d, np.complex128)
    k4 = np.empty(d, np.complex128)
    tmp = np.empty(d, np.complex128)
    for s in range(nsteps):
        t = t0 + s * dt
        _schrodinger_rhs(psi, t, freqs, mats, k1)
        for i in range(d):
            tmp[i] = psi[i] + 0.5 * dt * k1[i]
        _schrodinger_rhs(tmp, t + 0.5 * dt, freqs, mats, k2)
        for i in range(d):
            tmp[i] = psi[i] + 0.5 * dt * k2[i]
        _schrodinger_rhs(tmp, t + 0.5 * dt, freqs, mats, k3)
        for i in range(d):
            tmp[i] = psi[i] + dt * k3[i]
        _schrodinger_rhs(tmp, t + dt, freqs, mats, k4)
        for i in range(d):
            psi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return psi


@njit(cache=True)
def _lindblad_rhs(rho, t, freqs, mats, cops, rates, cdagc_diag, H, out):
    d = rho.shape[0]
    for i in range(d):
        for j in range(d):
            H[i, j] = 0.0j
    for k in range(freqs.shape[0]):
        ph = np.exp(1j * freqs[k] * t)
        m = mats[k]
        for i in range(d):
            for j in range(d):
                H[i, j] += ph * m[i, j]
    M = np.dot(H, rho)
    for i in range(d):
        for j in range(d):
            out[i, j] = -1j * (M[i, j] - np.conj(M[j, i]))
    for c in range(cops.shape[0]):
        g = rates[c]
        if g == 0.0:
            continue
        L = cops[c]
        Lr = np.dot(L, rho)
        LrL = np.dot(Lr, L.conj().T)
        for i in range(d):
            for j in range(d):
                out[i, j] += g * (LrL[i, j] - 0.5 * (cdagc_diag[c, i]
                                                     + cdagc_diag[c, j]) * rho[i, j])


@njit(cache=True)
def lindblad_rk4(rho0, t0, dt, nsteps, freqs, mats, cops, rates, cdagc_diag):
    d = rho0.shape[0]
    rho = rho0.copy()
    H = np.empty((d, d), np.complex128)
    k1 = np.empty((d, d), np.complex128)
    k2 = np.empty((d, d), np.complex128)
    k3 = np.empty((d, d), np.complex128)
    k4 = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    for s in range(nsteps):
        t = t0 + s * dt
        _lindblad_rhs(rho, t, freqs, mats, cops, rates, cdagc_diag, H, k1)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
        _lindblad_rhs(tmp, t + 0.5 * dt, freqs, mats, cops, rates, cdagc_diag, H, k2)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
        _lindblad_rhs(tmp, t + 0.5 * dt, freqs, mats, cops, rates, cdagc_diag, H, k3)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + dt * k3[i, j]
        _lindblad_rhs(tmp, t + dt, freqs, mats, cops, rates, cdagc_diag, H, k4)
        for i in range(d):
            for j in range(d):
                rho[i, j] += (dt / 6.0) * (k1[i, j] + 2.0 * k2[i, j]
                                           + 2.0 * k3[i, j] + k4[i, j])
    return rho
