"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_core.py [--n 512] [--repeat 3]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from translab import _fallback
from translab.grids import PotentialSpec, SpaceGrid, SpectralGrid

try:
    from translab import _core
except ImportError:  # extension not built
    _core = None


def inputs(n: int):
    grid = SpaceGrid(8.0, n)
    q = PotentialSpec.constant(1.0)
    x, h = grid.nodes, grid.h
    half = np.maximum(x - 0.5 * h, 0.0)
    goursat = (q(x), q(half), q.half_integral(x), q.half_integral(half), h)
    lam = SpectralGrid(100.0, n).lam
    n_sub = 4
    q_fine = q(np.linspace(0.0, 8.0, 2 * n_sub * (n - 1) + 1))
    rk4 = (q_fine, lam, h, n_sub)
    K, _ = _fallback.goursat_march(*goursat)
    volterra = (np.ascontiguousarray(K * grid.row_weights),)
    return {"goursat_march": goursat, "volterra_invert": volterra, "rk4_march": rk4}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    data = inputs(args.n)
    print(f"n = {args.n}")
    print(f"{'kernel':18s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max|diff|':>10s}")
    for name, a in data.items():
        py = getattr(_fallback, name)
        t_py = min(timeit.repeat(lambda: py(*a), number=1, repeat=args.repeat))
        if _core is None:
            print(f"{name:18s} {t_py:11.4f} {'n/a':>11s}")
            continue
        cy = getattr(_core, name)
        t_cy = min(timeit.repeat(lambda: cy(*a), number=1, repeat=args.repeat))
        r_py, r_cy = py(*a), cy(*a)
        r_py = r_py[0] if isinstance(r_py, tuple) else r_py
        r_cy = r_cy[0] if isinstance(r_cy, tuple) else r_cy
        diff = float(np.nanmax(np.abs(np.asarray(r_py) - np.asarray(r_cy))))
        print(f"{name:18s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
