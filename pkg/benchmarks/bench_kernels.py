#!/usr/bin/env python3
"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 1]

Also times one end-to-end negativity run under each backend, in a fresh
interpreter with CGNEG_PURE set accordingly.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cgneg import _fallback

try:
    from cgneg import _core
except ImportError:
    _core = None


def cases(size):
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.uniform(0.0, 40.0, 200_000 * size))
    xs = np.linspace(0.0, np.pi, 400 * size)
    ps = np.linspace(-40.0, 40.0, 800 * size)
    grid = np.ascontiguousarray(rng.standard_normal((400 * size, 400)))
    taps = np.exp(-3.0 * np.linspace(-3.0, 3.0, 61) ** 2)
    return {
        "laguerre_array n=40": lambda m: m.laguerre_array(40, 0.0, x),
        "well_wigner_grid n=3": lambda m: m.well_wigner_grid(3, xs, ps),
        "conv_axis0 61 taps": lambda m: m.conv_axis0(grid, taps),
        "neg_line_integrals": lambda m: m.neg_line_integrals(grid, 0.01),
    }


def end_to_end(pure: bool) -> float:
    code = (
        "import time;from cgneg import negativity_adaptive, SquareWell, QuadratureSpec;"
        "t=time.perf_counter();negativity_adaptive(SquareWell(1), None, QuadratureSpec(abs_tolerance=1e-3));"
        "print(time.perf_counter()-t)"
    )
    env = dict(os.environ, CGNEG_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=1, help="problem size multiplier")
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()

    if _core is None:
        print("compiled core not built; only the fallback is available")
    print(f"{'kernel':<24}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, fn in cases(args.size).items():
        t_np = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat)) * 1e3
        if _core is None:
            print(f"{name:<24}{t_np:12.2f}{'-':>13}{'-':>9}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(_core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<24}{t_np:12.2f}{t_cy:13.2f}{t_np / t_cy:9.1f}")
    if not args.skip_end_to_end:
        t_np = end_to_end(True)
        line = f"{'well n=1 negativity':<24}{t_np * 1e3:12.0f}"
        if _core is not None:
            t_cy = end_to_end(False)
            line += f"{t_cy * 1e3:13.0f}{t_np / t_cy:9.1f}"
        print(line)


if __name__ == "__main__":
    main()
