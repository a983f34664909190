"""Time the compiled kernels against the NumPy fallback on production-size inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from kmsentropy import _backend
from kmsentropy.adiabatic import VanHoveCutoff
from kmsentropy.functionals import GaussianProfile
from kmsentropy.spectral import GridSpec, single_line_grid
from kmsentropy.thermal import ThermalParams


def cases():
    params = ThermalParams(1.0, 1.0)
    rho = single_line_grid(GaussianProfile(1.0, 1.0), params, GridSpec())
    rng = np.random.default_rng(0)
    r, wr, hr = VanHoveCutoff(8).radial_nodes()
    q = np.linspace(0.0, 30.0, 4096)
    f = rng.uniform(-20.0, 20.0, 16385)
    w = rng.uniform(size=f.size)
    t = np.linspace(0.0, 50.0, 64)
    return {
        "even_convolve (16k points)": lambda k: k.even_convolve(rho.values, rho.values),
        "radial_sine_transform (4k x %d)" % r.size: lambda k: k.radial_sine_transform(q, r, wr * hr * r * r),
        "trig_moments (16k x 64)": lambda k: k.trig_moments(f, w, t, 0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = [n for n in ("compiled", "python") if n in _backend.BACKENDS]
    if "compiled" not in names:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':34s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases().items():
        best = {}
        for n in names:
            k = _backend.get_backend(n)
            fn(k)  # warm up
            best[n] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{label:34s}" + "".join(f"{best[n]:11.4f}s" for n in names)
        if len(names) == 2:
            row += f"{best['python'] / best['compiled']:11.2f}x"
        print(row)


if __name__ == "__main__":
    main()
