"""Time the phase-space kernels on both backends.

    python benchmarks/bench_kernels.py [--N 5] [--eps 1.3] [--spacing 0.1] [--repeat 5]

Builds the NESS for the given pump, samples it on the grid a quench snapshot
would use, then times ``bargmann_fields`` and ``functional_sums`` on the numpy
and numba paths (best of ``--repeat``, after one warm-up call that absorbs JIT
compilation). Also reports the largest relative disagreement between paths.
"""
import argparse
import time

import numpy as np

from kerrq import _kernels
from kerrq.liouville import build_liouvillian, solve_ness
from kerrq.operators import ModelParams, choose_truncation, moments
from kerrq.phasespace import Q_EXCLUDE, adaptive_field


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--N", type=float, default=5.0)
    ap.add_argument("--eps", type=float, default=1.3)
    ap.add_argument("--spacing", type=float, default=0.1)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    p = ModelParams(epsilon=args.eps, N=args.N)
    d = choose_truncation(p) + 1
    rho = solve_ness(build_liouvillian(p, d))
    mu = adaptive_field(rho, args.spacing).mu
    mean, _ = moments(rho)
    print(f"N={args.N:g} eps={args.eps:g} d={d} grid points={mu.size}")

    impls = [_kernels.numpy_impl] + ([_kernels.numba_impl] if _kernels.numba_impl else [])
    results = {}
    for impl in impls:
        Q, A = impl.bargmann_fields(mu, rho)
        qcut = Q_EXCLUDE * Q.max()
        t_fields = best_of(lambda: impl.bargmann_fields(mu, rho), args.repeat)
        t_sums = best_of(lambda: impl.functional_sums(mu, Q, A, mean, qcut), args.repeat)
        results[impl.name] = (t_fields, t_sums, Q, A, np.array(impl.functional_sums(mu, Q, A, mean, qcut)))
        print(f"{impl.name:6s} fields {t_fields * 1e3:9.2f} ms   sums {t_sums * 1e3:8.3f} ms")

    if len(results) == 2:
        (tf0, ts0, Q0, A0, s0), (tf1, ts1, Q1, A1, s1) = results["numpy"], results["numba"]
        dq = np.max(np.abs(Q1 - Q0)) / np.max(np.abs(Q0))
        ds = np.max(np.abs(s1 - s0) / np.maximum(np.abs(s0), 1e-300))
        print(f"speedup fields x{tf0 / tf1:.2f}  sums x{ts0 / ts1:.2f}")
        print(f"max rel. disagreement: fields {dq:.1e}  sums {ds:.1e}")
    else:
        print("numba not importable; only the numpy path was timed")


if __name__ == "__main__":
    main()
