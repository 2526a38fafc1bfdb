"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the pure-state and density-matrix RK4 propagators on a random
harmonic decomposition at a few Hilbert-space dimensions, printing
microseconds per step and the speedup ratio.  The first compiled call
includes JIT compilation and is excluded by a warmup run.

Usage:
    python benchmarks/bench_backends.py [--dims 32 64 128] [--terms 4]
        [--steps 200] [--repeats 3]
"""

import argparse
import time

import numpy as np

from cavqed.backends import available_backends, get_kernels


def random_problem(dim, n_terms, seed):
    """Random Hermitian-closed harmonic decomposition plus states."""
    rng = np.random.default_rng(seed)
    freqs = np.empty(2 * n_terms)
    mats = np.empty((2 * n_terms, dim, dim), dtype=np.complex128)
    for k in range(n_terms):
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m *= 0.05 / dim
        f = rng.uniform(0.5, 5.0)
        freqs[2 * k], mats[2 * k] = f, m
        freqs[2 * k + 1], mats[2 * k + 1] = -f, m.conj().T
    psi0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    psi0 /= np.linalg.norm(psi0)
    rho0 = np.outer(psi0, psi0.conj())
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1).astype(np.complex128)
    cops = a[None, :, :].copy()
    rates = np.array([1e-3])
    cdagc = np.real(np.einsum("ki,ki->i", a.conj(), a))[None, :].copy()
    return freqs, mats, psi0, rho0, cops, rates, cdagc


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(dim, n_terms, steps, repeats):
    freqs, mats, psi0, rho0, cops, rates, cdagc = random_problem(dim, n_terms, seed=7)
    dt = 1e-3
    rows = {}
    for name in available_backends():
        kern = get_kernels(name)
        kern.schrodinger_rk4(psi0, 0.0, dt, 2, freqs, mats)
        kern.lindblad_rk4(rho0, 0.0, dt, 2, freqs, mats, cops, rates, cdagc)
        t_pure = time_call(
            lambda: kern.schrodinger_rk4(psi0, 0.0, dt, steps, freqs, mats), repeats)
        t_mix = time_call(
            lambda: kern.lindblad_rk4(rho0, 0.0, dt, steps, freqs, mats,
                                      cops, rates, cdagc), repeats)
        rows[name] = (1e6 * t_pure / steps, 1e6 * t_mix / steps)
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs="+", default=[32, 64, 128, 256])
    p.add_argument("--terms", type=int, default=4,
                   help="harmonic terms before hermitian closure")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    names = available_backends()
    print(f"backends: {', '.join(names)}")
    if len(names) == 1:
        print("compiled backend unavailable; timing the fallback only")
    header = f"{'dim':>5} {'kernel':>10}"
    for name in names:
        header += f" {name + ' us/step':>16}"
    if len(names) == 2:
        header += f" {'speedup':>8}"
    print(header)

    for dim in args.dims:
        rows = bench(dim, args.terms, args.steps, args.repeats)
        for j, kernel in enumerate(("schrodinger", "lindblad")):
            line = f"{dim if j == 0 else '':>5} {kernel:>10}"
            vals = [rows[name][j] for name in names]
            for v in vals:
                line += f" {v:>16.1f}"
            if len(vals) == 2:
                line += f" {vals[1] / vals[0]:>7.1f}x"
            print(line)


if __name__ == "__main__":
    main()
