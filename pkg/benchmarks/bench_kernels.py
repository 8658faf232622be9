"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 400] [--zones 40] [--repeat 3]

Each case runs through the public API with WARDPOP_DISABLE_NUMBA set to 0
and then 1. Reported times are the best of ``--repeat`` runs after one
warm-up call, so numba compilation is excluded.
"""
import argparse
import math
import os
import time

import numpy as np

from wardpop.geometry import Polygon, Ring
from wardpop.popmodel import MHConfig, ModelParams, fit_map, fit_mh, simulate_dataset
from wardpop.raster import Grid
from wardpop.zonal import zonal_stats
from wardpop.zones import Zone


def wobbly_polygon(rng, cx, cy, r, k=64):
    t = np.sort(rng.uniform(0, 2 * math.pi, k))
    rad = r * rng.uniform(0.5, 1.0, k)
    return Polygon(Ring(list(zip(cx + rad * np.cos(t), cy + rad * np.sin(t)))))


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=400, help="grid is size x size cells")
    ap.add_argument("--zones", type=int, default=40)
    ap.add_argument("--records", type=int, default=2000, help="survey locations for the MH case")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.size
    grid = Grid(rng.exponential(50.0, (n, n)), 0.0, 0.0, 1.0, -9999.0)
    zones = [
        Zone((wobbly_polygon(rng, *rng.uniform(0.1 * n, 0.9 * n, 2), rng.uniform(0.05, 0.2) * n),), f"z{i}")
        for i in range(args.zones)
    ]

    truth = ModelParams.zeros((2, 2, 1, 1), K=3, sigma=0.3)
    truth.alpha0 = math.log(100.0)
    truth.beta[:] = [0.5, -0.3, 0.1]
    data, _ = simulate_dataset(truth, args.records, np.random.default_rng(1))
    init = fit_map(data)

    cases = {
        "coverage (weighted zonal)": lambda: zonal_stats(grid, zones, "weighted"),
        "cell centres (center zonal)": lambda: zonal_stats(grid, zones, "center"),
        "MH latent sweeps (500 draws)": lambda: fit_mh(data, MHConfig(draws=500, burn_in=100, seed=0), init=init),
    }

    old = os.environ.get("WARDPOP_DISABLE_NUMBA")
    print(f"{'case':<30} {'numba s':>10} {'numpy s':>10} {'speed-up':>9}")
    try:
        for name, fn in cases.items():
            row = []
            for flag in ("0", "1"):
                os.environ["WARDPOP_DISABLE_NUMBA"] = flag
                row.append(best_of(fn, args.repeat))
            print(f"{name:<30} {row[0]:>10.4f} {row[1]:>10.4f} {row[1] / row[0]:>8.1f}x")
    finally:
        if old is None:
            os.environ.pop("WARDPOP_DISABLE_NUMBA", None)
        else:
            os.environ["WARDPOP_DISABLE_NUMBA"] = old


if __name__ == "__main__":
    main()
