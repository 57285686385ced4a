"""Compare the compiled and pure-numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times Aberth root finding on Kac polynomials and log-modulus evaluation on
a 201 x 201 grid for each available backend, and checks that both backends
return the same roots.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from randorth import kernels
from randorth.zeros import _initial_guesses, ROOT_TOL, MAX_ITER


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--degrees", default="50,100,200,400")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    x = np.linspace(-2, 2, 201)
    grid = (x[:, None] + 1j * x[None, :]).ravel()
    print(f"backends: {', '.join(kernels.AVAILABLE)}")
    print(f"{'kernel':12s} {'degree':>6s} " + " ".join(f"{b:>10s}" for b in kernels.AVAILABLE) + "   speedup")
    for n in (int(v) for v in args.degrees.split(",")):
        c = (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)) / np.sqrt(2)
        init = _initial_guesses(c)
        res = {}
        for b in kernels.AVAILABLE:
            kernels.use_backend(b)
            res[b] = _best(lambda: kernels.aberth(c, init, ROOT_TOL, MAX_ITER), args.repeat)
        roots = [np.sort_complex(r[1][0]) for r in res.values()]
        agree = max(np.max(np.abs(r - roots[0])) for r in roots)
        t = [res[b][0] for b in kernels.AVAILABLE]
        print(f"{'aberth':12s} {n:6d} " + " ".join(f"{v * 1e3:8.1f}ms" for v in t)
              + (f"   {t[1] / t[0]:6.1f}x" if len(t) > 1 else "") + f"   (max root diff {agree:.1e})")
        res = {}
        for b in kernels.AVAILABLE:
            kernels.use_backend(b)
            res[b] = _best(lambda: kernels.poly_logabs(c, grid), args.repeat)
        t = [res[b][0] for b in kernels.AVAILABLE]
        print(f"{'poly_logabs':12s} {n:6d} " + " ".join(f"{v * 1e3:8.1f}ms" for v in t)
              + (f"   {t[1] / t[0]:6.1f}x" if len(t) > 1 else ""))
    kernels.use_backend(kernels.AVAILABLE[0])


if __name__ == "__main__":
    main()
