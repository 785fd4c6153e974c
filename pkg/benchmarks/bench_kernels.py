"""Compare the compiled and pure-Python kernels on the workloads the library runs.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from geophase import _pykernels

try:
    from geophase import _ckernels
except ImportError:
    _ckernels = None


def unitary_stack(rng, n, d):
    z = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    q, _ = np.linalg.qr(z)
    return q


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = [
        # (label, kernel name, n factors, matrix size)
        ("P-exponent, r=1, N=4096", "ordered_product", 4096, 1),
        ("P-exponent, r=2, N=4096", "ordered_product", 4096, 2),
        ("frame alignment, r=2, N=4096", "ordered_partials", 4096, 2),
        ("Schrodinger sweep, d=2, T=400", "propagate", 25600, 2),
        ("Schrodinger sweep, d=4, T=400", "propagate", 25600, 4),
    ]
    print(f"{'workload':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, name, n, d in cases:
        f = unitary_stack(rng, n, d)
        psi = f[0][:, :1].copy()
        argv = (f, psi) if name == "propagate" else (f,)
        t_py = best_of(lambda: getattr(_pykernels, name)(*argv), args.repeat)
        if _ckernels is None:
            print(f"{label:34s} {1e3 * t_py:12.2f} {'n/a':>12s} {'':>8s}")
            continue
        t_c = best_of(lambda: getattr(_ckernels, name)(*argv), args.repeat)
        ref, got = getattr(_pykernels, name)(*argv), getattr(_ckernels, name)(*argv)
        assert np.allclose(ref, got), label
        print(f"{label:34s} {1e3 * t_py:12.2f} {1e3 * t_c:12.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
