"""Shared analytic state constructors for the tests."""

import math

import numpy as np


def squeezed_vacuum_vector(dim, r, theta=0.0):
    """Fock amplitudes of the single-mode squeezed vacuum S(r e^{i theta})|0>.

    c_{2m} = (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r));
    odd amplitudes vanish.  Renormalized after truncation.
    """
    v = np.zeros(dim, dtype=np.complex128)
    base = -np.exp(1j * theta) * math.tanh(r)
    for m in range(0, (dim - 1) // 2 + 1):
        v[2 * m] = (base ** m * math.sqrt(math.factorial(2 * m))
                    / (2 ** m * math.factorial(m)))
    v /= math.sqrt(math.cosh(r))
    return v / np.linalg.norm(v)


def thermal_like_density(dim, mean_n, seed=None):
    """Diagonal density matrix with geometric weights (thermal shape)."""
    p = mean_n / (1.0 + mean_n)
    w = p ** np.arange(dim)
    w /= w.sum()
    return np.diag(w).astype(np.complex128)
