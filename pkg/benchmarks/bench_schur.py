"""Timing comparison for the two Schur-complement assembly kernels.

The solver spends most of each iteration accumulating
M[i,k] += sum_j Re tr(F_ji V_j F_jk V_j) from sparse coefficient entries.
This script times the numba scalar-loop kernel against the vectorized
numpy fallback, first on synthetic entry arrays shaped like real problems,
then end to end on two representative measures.

Run:  python3 benchmarks/bench_schur.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from entbound import kernels
from entbound.measures import det_distill_one_copy, e_w
from entbound.states import rho_alpha, sigma_r, tensor_state


def synth_case(nb, m, width, nmax, seed):
    rng = np.random.default_rng(seed)
    vstack = np.zeros((nb, nmax, nmax), dtype=np.complex128)
    for j in range(nb):
        a = rng.normal(size=(nmax, nmax)) + 1j * rng.normal(size=(nmax, nmax))
        vstack[j] = (a + a.conj().T) / 2
    rows = rng.integers(0, nmax, size=(nb, m, width))
    cols = rng.integers(0, nmax, size=(nb, m, width))
    vals = rng.normal(size=(nb, m, width))
    cnts = rng.integers(1, width + 1, size=(nb, m))
    # entries past each count must be inert on both paths
    mask = np.arange(width)[None, None, :] < cnts[:, :, None]
    vals = np.where(mask, vals, 0.0)
    rows = np.where(mask, rows, 0)
    cols = np.where(mask, cols, 0)
    return vstack, rows, cols, vals, cnts.astype(np.int64)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(repeat):
    cases = [
        ("w-primal 3x3", 3, 45, 2, 9),
        ("w-dual 3x3", 4, 90, 2, 9),
        ("det 4x4 two-copy", 3, 137, 2, 16),
        ("det 6x6 tensor", 3, 300, 2, 36),
    ]
    print(f"{'case':<20} {'m':>5} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name, nb, m, width, nmax in cases:
        args = synth_case(nb, m, width, nmax, seed=hash(name) % 2**32)
        m_nb = np.zeros((m, m))
        m_np = np.zeros((m, m))
        if kernels._schur_numba is not None:
            kernels._schur_numba(m_nb, *args)  # compile before timing
            m_nb[:] = 0.0
            t_nb = best_of(lambda: kernels._schur_numba(m_nb, *args), repeat)
        else:
            t_nb = float("nan")
        t_np = best_of(lambda: kernels._schur_gather(m_np, *args), repeat)
        ratio = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{name:<20} {m:>5} {t_nb * 1e3:>10.3f} {t_np * 1e3:>10.3f} {ratio:>8.2f}")
        if kernels._schur_numba is not None:
            # both held exactly `repeat` accumulations of the same M
            assert np.allclose(m_nb, m_np, atol=1e-9)


def bench_end_to_end(repeat):
    workloads = [
        ("e_w rho(0.5) 3x3", lambda: e_w(rho_alpha(0.5))),
        ("det sigma x rho 6x6", lambda: det_distill_one_copy(
            tensor_state(sigma_r(0.5), rho_alpha(0.5)))),
    ]
    print()
    print(f"{'measure':<22} {'numba s':>9} {'numpy s':>9} {'speedup':>8}")
    had_numba = kernels.USING_NUMBA
    for name, fn in workloads:
        fn()  # warm caches on the active path
        kernels.USING_NUMBA = had_numba
        t_nb = best_of(fn, repeat) if had_numba else float("nan")
        kernels.USING_NUMBA = False
        try:
            t_np = best_of(fn, repeat)
        finally:
            kernels.USING_NUMBA = had_numba
        ratio = t_np / t_nb if t_nb == t_nb else float("nan")
        print(f"{name:<22} {t_nb:>9.3f} {t_np:>9.3f} {ratio:>8.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timings keep the best of N runs")
    args = parser.parse_args()
    print(f"active kernel: {kernels.kernel_name()}")
    bench_kernels(args.repeat)
    bench_end_to_end(max(2, args.repeat // 2))


if __name__ == "__main__":
    main()
