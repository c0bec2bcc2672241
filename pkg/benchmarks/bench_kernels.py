"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
Prints the best-of-N wall time per kernel and backend, and the largest
difference between backends on the benchmark inputs.
"""

import argparse
import timeit

import numpy as np

from pfpoint import kernels


def cases():
    rng = np.random.default_rng(0)
    x = np.geomspace(1e-6, 1e5, 200_000)
    m = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    n = 100_000
    xm = np.linspace(0.0, 100.0, n)
    h = np.full(n, 100.0 / n)
    fa, fm, fb = (rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(3))
    return {
        "scaled_ei_array (2e5 points)": lambda mod: mod.scaled_ei_array(x),
        "scaled_ei scalar (1e4 calls)": lambda mod: [mod.scaled_ei(v) for v in x[::20]],
        "permanent 10x10": lambda mod: mod.permanent(m),
        "filon_panels (1e5 panels)": lambda mod: mod.filon_panels(xm, h, fa, fm, fb, 3.0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"selected backend: {kernels.BACKEND}; available: {', '.join(sorted(backends))}")
    for name, fn in cases().items():
        times = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for b, mod in backends.items()}
        line = f"{name:32s}" + "".join(f"  {b} {t * 1e3:9.3f} ms" for b, t in sorted(times.items()))
        if len(backends) > 1:
            ref = np.asarray(fn(backends["python"]), dtype=complex)
            got = np.asarray(fn(backends["cython"]), dtype=complex)
            diff = float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)))
            line += f"  speedup {times['python'] / times['cython']:6.1f}x  max rel diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
