"""Benchmark the principal-value quadrature kernels: compiled vs fallback.

Usage::

    python benchmarks/bench_pv.py [--sizes 16,24,32,48,64] [--repeats 3]

The compiled backend runs the literal loop transcriptions; the numpy
fallback vectorizes the same sums (matrix products for the separable double
sum, per-output-pixel vector sums otherwise).  Both must agree to rounding;
the benchmark asserts that before timing.
"""

import argparse
import time

import numpy as np

from iquad._kernels import available_backends, get_backend


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeats):
    backends = {name: get_backend(name) for name in available_backends()}
    if len(backends) == 1:
        print("note: compiled extension not available; timing the fallback only")
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        phi = rng.standard_normal((n, n))
        psi = rng.standard_normal((n, n))
        k = np.arange(n) - n // 2
        pupil = ((k[:, None] ** 2 + k[None, :] ** 2) < (n / 4.0) ** 2).astype(float)
        detector = np.ones((n, n))
        cases = {
            "pv_sum2d": ("pv_sum2d", (phi, 1.0, False)),
            "pv_i1_direct": ("pv_i1_direct", (phi, pupil, 1.0, False)),
            "pv_i1p_direct": ("pv_i1p_direct", (phi, psi, pupil, 1.0, False)),
        }
        if n <= 12:
            cases["pv_i2_raw"] = ("pv_i2_raw", (phi, pupil, detector, 1.0, False))
        for label, (fname, args) in cases.items():
            outs = {}
            times = {}
            for bname, mod in backends.items():
                fn = getattr(mod, fname)
                outs[bname] = fn(*args)
                times[bname] = time_call(fn, *args, repeats=repeats)
            if len(outs) == 2:
                a, b = outs["python"], outs["cython"]
                scale = max(np.abs(a).max(), 1e-300)
                assert np.abs(a - b).max() <= 1e-10 * scale, f"{label} backend mismatch at n={n}"
            rows.append((n, label, times))
    print(f"{'n':>4s}  {'kernel':<14s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup")
    for n, label, times in rows:
        line = f"{n:>4d}  {label:<14s}"
        for b in backends:
            line += f"{times[b] * 1e3:>10.2f}ms"
        if len(times) == 2:
            line += f"   {times['python'] / times['cython']:>6.1f}x"
        print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="12,16,24,32,48,64")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    bench(sizes, args.repeats)


if __name__ == "__main__":
    main()
