"""Compare the compiled and numpy kernels on the default scenario grid.

    python benchmarks/bench_kernels.py [--epsilon 20] [--repeat 5] [--threads 1]
"""

import argparse
import time

import numpy as np

from pencilbeam import kernels
from pencilbeam.analysis import overlap_grid
from pencilbeam.beams import tune_pencil_beams
from pencilbeam.config import ScenarioConfig
from pencilbeam.emf import GridGeometry, RadioConstants, exposure_grid
from pencilbeam.pipeline import place
from pencilbeam.scenario import build_grid, generate_measurement_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=20.0)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = ScenarioConfig(epsilon=args.epsilon)
    layout = build_grid(cfg)
    grid = generate_measurement_grid(cfg, layout)
    geom = GridGeometry.build(layout.sectors, grid)
    beams = tune_pencil_beams(layout.sectors, place(cfg, layout, 0).spots, cfg.epsilon,
                              cfg.alpha_st_min, cfg.alpha_tl_min)
    consts = RadioConstants.from_config(cfg)
    print(f"{len(grid)} measurement spots x {len(beams)} beams, best of {args.repeat}")

    backends = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    results = {}
    for name in backends:
        t_emf, s = best_of(lambda: exposure_grid(beams, geom, consts, args.threads, name).s_total,
                           args.repeat)
        t_ovl, c = best_of(lambda: overlap_grid(beams, geom, args.threads, name), args.repeat)
        results[name] = (t_emf, t_ovl, s, c)
        print(f"{name:>9}: emf_accumulate {t_emf * 1e3:8.1f} ms   overlap_counts {t_ovl * 1e3:8.1f} ms")

    if "compiled" in results:
        py, cc = results["python"], results["compiled"]
        print(f"  speedup: emf {py[0] / cc[0]:.1f}x   overlap {py[1] / cc[1]:.1f}x")
        print(f"  max rel diff emf {np.max(np.abs(py[2] - cc[2]) / py[2]):.1e}; "
              f"overlap identical: {np.array_equal(py[3], cc[3])}")
    else:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
