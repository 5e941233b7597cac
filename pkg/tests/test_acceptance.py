"""Acceptance criteria, each checked at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed in the "acceptance criteria" section of the terminal summary.
"""

import math
import sys
import time

import numpy as np
import pytest

from pencilbeam import kernels
from pencilbeam.analysis import ecdf
from pencilbeam.beams import fixed_width_beams, pencil_widths, tune_pencil_beams
from pencilbeam.config import EPSILON_LEVELS, ScenarioConfig
from pencilbeam.emf import GridGeometry, RadioConstants, exposure_grid, field_strength
from pencilbeam.geometry import Point3
from pencilbeam.pipeline import ExperimentSpec, place, run_experiment
from pencilbeam.scenario import build_grid, generate_measurement_grid
from pencilbeam.throughput import beamforming_pattern, linear_to_db

pytestmark = pytest.mark.slow

RUNS = 20
L_SWEEP = (50.0, 100.0, 150.0, 200.0)
GAIN_SWEEP = (9.0, 12.0, 15.0)


def fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


@pytest.fixture(scope="session")
def eps_sweep():
    spec = ExperimentSpec(ScenarioConfig(n_runs=RUNS), sweep=("epsilon", EPSILON_LEVELS))
    start = time.perf_counter()
    results = run_experiment(spec)
    elapsed = time.perf_counter() - start
    return {r.cfg.epsilon: r for r in results.values()}, elapsed


def deciles(values):
    return ecdf(values).deciles()


def test_criterion_1_emf_ecdf_ordering(eps_sweep, report):
    results, elapsed = eps_sweep
    problems = []
    pencil = {}
    for eps, r in results.items():
        p, f, n = (deciles(r[k].mean_field()) for k in ("pencil", "fixed", "none"))
        pencil[eps] = p
        if np.any(p > f):
            problems.append(f"pencil>fixed at eps={eps:g}")
        if np.any(f > n):
            problems.append(f"fixed>none at eps={eps:g}")
    for wide, narrow in zip(EPSILON_LEVELS, EPSILON_LEVELS[1:]):
        if np.any(pencil[narrow] > pencil[wide] * 1.01):
            problems.append(f"decile rose >1% from eps={wide:g} to {narrow:g}")
    if elapsed >= 300.0:
        problems.append(f"runtime {elapsed:.0f}s")
    r20 = results[20.0]
    detail = (f"eps=20 deciles pencil {fmt(pencil[20.0])} fixed {fmt(deciles(r20['fixed'].mean_field()))} "
              f"none {fmt(deciles(r20['none'].mean_field()))}; eps=2 pencil {fmt(pencil[2.0])}; "
              f"sweep {elapsed:.0f}s" + (f"; {problems}" if problems else ""))
    report("criterion 1", not problems, detail)
    assert not problems


def test_criterion_2_emf_ceiling(eps_sweep, report):
    results, _ = eps_sweep
    maxima = {eps: float(r["pencil"].mean_field().max()) for eps, r in results.items()}
    ok = all(v <= 6.0 for v in maxima.values())
    report("criterion 2", ok, "max run-averaged pencil EMF " +
           ", ".join(f"eps={e:g}: {v:.3f} V/m" for e, v in maxima.items()) + " (limit 6)")
    assert ok


def test_criterion_3_throughput(eps_sweep, report):
    results, _ = eps_sweep
    t2 = results[2.0]["pencil"].pooled_throughput() / 1e6
    t20 = results[20.0]["pencil"].pooled_throughput() / 1e6
    tf = results[20.0]["fixed"].pooled_throughput() / 1e6
    frac = float(np.mean(t2 > 100.0))
    d2, d20, df = deciles(t2), deciles(t20), deciles(tf)
    ok = frac >= 0.70 and np.all(d2 >= d20) and np.all(d20 >= df)
    report("criterion 3", ok, f"eps=2 share >100 Mbit/s {frac:.1%}; deciles eps=2 {fmt(d2)} "
           f"eps=20 {fmt(d20)} fixed {fmt(df)} Mbit/s")
    assert ok


def test_criterion_4_pointwise_dominance(eps_sweep, report):
    results, _ = eps_sweep
    r = results[2.0]
    cfg = r.cfg
    violations = 0
    checked = 0
    widest = 0.0
    fixed_width = min(cfg.alpha_st_fixed, cfg.alpha_tl_fixed)
    for beams, e_pencil, e_fixed in zip(r["pencil"].beams, r["pencil"].fields, r["fixed"].fields):
        widest = max(widest, max(max(b.width_st, b.width_tl) for b in beams))
        violations += int(np.count_nonzero(e_pencil > e_fixed))
        checked += e_pencil.size

    # the same placements against 15 degree fixed beams
    geom = GridGeometry.build(r.layout.sectors, r.grid)
    consts = RadioConstants.from_config(cfg)
    for run in range(3):
        spots = place(cfg, r.layout, run).spots
        pencil = tune_pencil_beams(r.layout.sectors, spots, 2.0, 3.0, 3.0)
        fixed = fixed_width_beams(r.layout.sectors, spots, 15.0, 15.0)
        widest = max(widest, max(max(b.width_st, b.width_tl) for b in pencil))
        sp = exposure_grid(pencil, geom, consts).s_total
        sf = exposure_grid(fixed, geom, consts).s_total
        violations += int(np.count_nonzero(sp > sf))
        checked += sp.size
    ok = violations == 0 and widest <= min(15.0, fixed_width) and len(r.grid) > 25_000
    report("criterion 4", ok, f"{violations} violations over {checked} spot-runs "
           f"({len(r.grid)} spots); widest pencil beam {widest:.2f} deg")
    assert ok


def test_criterion_5_oracle_equivalence(report):
    rng = np.random.default_rng(20240605)
    worst = 0.0
    for _ in range(1000):
        d2 = rng.uniform(11.0, 500.0)
        eps = rng.uniform(0.1, 20.0)
        h_s = rng.uniform(5.0, 50.0)
        h_d = rng.uniform(0.0, h_s - 1.0)
        az = rng.uniform(0.0, 360.0)
        r = eps / 2
        sector = Point3(0.0, 0.0, h_s)
        spot = Point3(d2 * math.cos(math.radians(az)), d2 * math.sin(math.radians(az)), h_d)
        st_, tl, _ = pencil_widths(sector, spot, eps)
        d = math.hypot(spot.x, spot.y)
        dh = h_s - h_d
        oracle_st = 2 * math.degrees(math.asin(r / d))
        oracle_tl = math.degrees(math.atan(dh / (d - r)) - math.atan(dh / (d + r)))
        worst = max(worst, abs(st_ - oracle_st), abs(tl - oracle_tl))
    ok = worst <= 1e-9
    report("criterion 5", ok, f"max deviation over 1000 tuples {worst:.2e} deg (limit 1e-9)")
    assert ok


def test_criterion_6_width_statistics(eps_sweep, report):
    results, _ = eps_sweep
    means = {}
    smallest = math.inf
    for eps in EPSILON_LEVELS:
        beams = [b for run in results[eps]["pencil"].beams for b in run]
        st_ = np.array([b.width_st for b in beams])
        tl = np.array([b.width_tl for b in beams])
        means[eps] = (st_.mean(), tl.mean())
        smallest = min(smallest, st_.min(), tl.min())
    order = [means[e] for e in EPSILON_LEVELS]
    monotone = all(b[0] <= a[0] and b[1] <= a[1] for a, b in zip(order, order[1:]))
    st_above = all(s >= t for s, t in order)
    ok = monotone and st_above and smallest >= 3.0
    report("criterion 6", ok, "mean (steering, tilting) " +
           ", ".join(f"eps={e:g}: ({s:.2f}, {t:.2f})" for e, (s, t) in means.items()) +
           f"; min width {smallest:.2f} deg")
    assert ok


def test_criterion_7_gain_sweep(report):
    spec = ExperimentSpec(ScenarioConfig(epsilon=2.0, n_runs=RUNS), ("pencil",),
                          ("g_max", GAIN_SWEEP))
    shares = {r.cfg.g_max: float(np.mean(r["pencil"].mean_field() < 2.0))
              for r in run_experiment(spec).values()}
    ok = all(v >= 0.95 for v in shares.values())
    report("criterion 7", ok, "share of spots below 2 V/m " +
           ", ".join(f"G={g:g} dBi: {v:.2%}" for g, v in shares.items()))
    assert ok


def l_sweep(mode):
    base = ScenarioConfig(epsilon=2.0, n_runs=RUNS, intra_sector_interference=False,
                          ue_density_mode=mode)
    res = run_experiment(ExperimentSpec(base, ("pencil",), ("sector_side_L", L_SWEEP)))
    emf = [float(np.median(r["pencil"].mean_field())) for r in res.values()]
    thr = [float(np.median(r["pencil"].pooled_throughput())) / 1e6 for r in res.values()]
    return emf, thr


def test_criterion_8_sector_size(report):
    emf_c, thr_c = l_sweep("fixed_count")
    emf_d, _ = l_sweep("fixed_density")
    checks = {
        "fixed_count EMF decreasing": all(b < a for a, b in zip(emf_c, emf_c[1:])),
        "fixed_count throughput decreasing": all(b < a for a, b in zip(thr_c, thr_c[1:])),
        "fixed_density EMF increasing": all(b > a for a, b in zip(emf_d, emf_d[1:])),
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report("criterion 8", ok, f"L={fmt(L_SWEEP)}: fixed_count median EMF {fmt(emf_c)} V/m, "
           f"median throughput {fmt(thr_c)} Mbit/s; fixed_density median EMF {fmt(emf_d)} V/m"
           + (f"; failed: {failed}" if failed else ""))
    assert ok


def test_criterion_9_calibration(report):
    cfg = ScenarioConfig()
    widths = np.array([3.0, 10.0, 30.0, 65.0])
    sinc_db = linear_to_db(beamforming_pattern(widths / 2, widths))
    s = np.logspace(-12, 3, 200)
    roundtrip = float(np.max(np.abs(field_strength(s) ** 2 / 377.0 - s) / s))
    noise = cfg.noise_dbm

    layout = build_grid(cfg)
    grid = generate_measurement_grid(cfg, layout)
    geom = GridGeometry.build(layout.sectors, grid)
    beams = tune_pencil_beams(layout.sectors, place(cfg, layout, 0).spots, 20.0, 3.0, 3.0)
    consts = RadioConstants.from_config(cfg)
    ref = exposure_grid(beams, geom, consts, threads=1).s_total.tobytes()
    same = all(exposure_grid(beams, geom, consts, threads=t).s_total.tobytes() == ref
               for t in (2, 4, 8))

    ok = (np.all(np.abs(sinc_db + 3.0) <= 0.05) and roundtrip <= 1e-12
          and abs(noise + 89.97) <= 0.01 and same)
    report("criterion 9", ok, f"sinc at half width {fmt(sinc_db)} dB; E/S roundtrip {roundtrip:.1e}; "
           f"noise {noise:.3f} dBm; threads 1/2/4/8 byte-identical={same} ({kernels.BACKEND} backend)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
