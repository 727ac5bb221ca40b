"""Time the compiled and pure-numpy QP kernels on random simplex projections.

    python3 benchmarks/bench_qp_backends.py [--sizes 100,1000,10000] [--reps 50]

Also runs one MEB solve per backend so the effect on a full solve is visible.
"""
import argparse
import time

import numpy as np

from egmgeom import qp
from egmgeom.meb import solve_meb_multiplicative


def _time(fn, reps):
    fn()  # warm-up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,1000,10000,100000")
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = qp.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the python backend is available")
    rng = np.random.default_rng(args.seed)
    print("simplex projection of standard normal g, scale 0.5")
    print(f"{'n':>8} " + " ".join(f"{b + ' (us)':>14}" for b in backends) + "   speedup")
    for n in (int(s) for s in args.sizes.split(",")):
        g = rng.standard_normal(n)
        times = {}
        for b in backends:
            times[b] = _time(lambda: qp.project_simplex_array(g, 0.5, backend=b), args.reps)
        cells = " ".join(f"{times[b] * 1e6:14.1f}" for b in backends)
        sp = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>8} {cells}   {sp:6.2f}x")

    print(f"\nroot_find on dense box QPs (every kink live)")
    print(f"{'n':>8} " + " ".join(f"{b + ' (us)':>14}" for b in backends) + "   speedup")
    for n in (int(s) for s in args.sizes.split(",")):
        lp = rng.standard_normal(n)
        up = lp + rng.uniform(0.1, 2.0, n)
        d2 = rng.uniform(0.5, 2.0, n)
        zp = float(lp.sum() + 0.5 * (up - lp).sum())
        times = {}
        for b in backends:
            k = qp._backend.get_kernel(b)
            times[b] = _time(lambda: k.root_find(lp, up, d2, zp, 0), args.reps)
        cells = " ".join(f"{times[b] * 1e6:14.1f}" for b in backends)
        sp = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>8} {cells}   {sp:6.2f}x")

    print()
    X = rng.standard_normal((5000, 20))
    for b in backends:
        orig = qp.project_simplex_array.__defaults__
        # route the engine's projections through this backend
        qp.project_simplex_array.__defaults__ = (orig[0], b)
        try:
            t0 = time.perf_counter()
            r = solve_meb_multiplicative(X, 1e-3, check="off", trace=False)
            dt = time.perf_counter() - t0
        finally:
            qp.project_simplex_array.__defaults__ = orig
        print(f"MEB 5000x20 with {b:>6}: {r.iterations} iterations, {dt:.3f} s")


if __name__ == "__main__":
    main()
