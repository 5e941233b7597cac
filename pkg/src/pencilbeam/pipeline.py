"""End-to-end simulation: layout, placement, beam synthesis, throughput and
exposure for every run of a scenario, plus experiment sweeps."""

from __future__ import annotations

import csv
import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, kernels
from .analysis import (average_field_over_runs, ecdf, overlap_grid, spot_exposure_table,
                       width_statistics, write_ecdf_csv, write_spot_emf_csv, write_widths_csv)
from .beams import Beam, fixed_width_beams, tune_pencil_beams, write_beams_csv
from .config import ScenarioConfig, check
from .config import validate as validate_config
from .emf import GridGeometry, RadioConstants, exposure_grid, no_beamforming_field, write_grid_csv
from .rng import stream
from .scenario import (DeploymentSpot, Layout, MeasurementGrid, UeLocation, build_grid,
                       generate_deployment_spots, generate_measurement_grid,
                       generate_ue_locations, write_scenario_csv)
from .throughput import SHADOW_STD, ThroughputResult, evaluate_throughput, write_throughput_csv

log = logging.getLogger(__name__)

POLICIES = ("pencil", "fixed", "none")
SWEEP_PARAMS = ("epsilon", "sector_side_L", "g_max")


@dataclass
class PolicyResult:
    policy: str
    fields: list[np.ndarray] = field(default_factory=list)
    throughput: list[ThroughputResult] = field(default_factory=list)
    beams: list[list[Beam]] = field(default_factory=list)
    overlap: np.ndarray | None = None

    def mean_field(self, mode: str = "field") -> np.ndarray:
        return average_field_over_runs(self.fields, mode)

    def pooled_throughput(self) -> np.ndarray:
        return np.concatenate([t.throughput for t in self.throughput])


@dataclass
class ScenarioResult:
    cfg: ScenarioConfig
    layout: Layout
    grid: MeasurementGrid
    policies: dict[str, PolicyResult]
    spots: list[list[DeploymentSpot]]
    ues: list[list[UeLocation]]

    def __getitem__(self, policy: str) -> PolicyResult:
        return self.policies[policy]


@dataclass(frozen=True)
class Placement:
    spots: list[DeploymentSpot]
    central_spots: list[DeploymentSpot]
    ues: list[UeLocation]
    shadow_db: np.ndarray | None


def place(cfg: ScenarioConfig, layout: Layout, run: int) -> Placement:
    """Deployment spots, true UE positions and shadowing for one run."""
    streams = [stream(cfg.seed, run, "spots", s.id) for s in layout.sectors]
    spots = generate_deployment_spots(cfg, layout, streams)
    central = layout.central_gnb.id
    central_spots = [d for d in spots if layout.sectors[d.serving_sector].gnb_id == central]
    ues = generate_ue_locations(central_spots, cfg.epsilon, stream(cfg.seed, run, "ue"),
                                cfg.uncertainty_radius_mode)
    shadow = None
    if cfg.shadow_fading:
        shadow = stream(cfg.seed, run, "shadow").normal(
            0.0, SHADOW_STD[cfg.los_mode], (len(ues), len(layout.sectors)))
    return Placement(spots, central_spots, ues, shadow)


def synthesize(policy: str, cfg: ScenarioConfig, layout: Layout,
               spots: Sequence[DeploymentSpot]) -> list[Beam]:
    if policy == "pencil":
        return tune_pencil_beams(layout.sectors, spots, cfg.epsilon, cfg.alpha_st_min,
                                 cfg.alpha_tl_min, cfg.uncertainty_radius_mode)
    if policy == "fixed":
        return fixed_width_beams(layout.sectors, spots, cfg.alpha_st_fixed, cfg.alpha_tl_fixed,
                                 cfg.epsilon, cfg.uncertainty_radius_mode)
    raise ValueError(f"policy {policy!r} does not deploy beams")


def simulate(cfg: ScenarioConfig, policies: Sequence[str] = POLICIES, threads: int = 1,
             progress: Callable[[str], None] | None = None) -> ScenarioResult:
    """Run every policy over ``cfg.n_runs`` independent placements."""
    check(cfg)
    unknown = set(policies) - set(POLICIES)
    if unknown:
        raise ValueError(f"unknown policies {sorted(unknown)}")
    layout = build_grid(cfg)
    grid = generate_measurement_grid(cfg, layout)
    geom = GridGeometry.build(layout.sectors, grid)
    consts = RadioConstants.from_config(cfg)
    results = {p: PolicyResult(p) for p in policies}
    all_spots, all_ues = [], []

    omni = None
    if "none" in policies:
        omni = no_beamforming_field(layout.gnbs, grid, cfg.p_tx_array, cfg.g_max_linear)

    for run in range(cfg.n_runs):
        if progress:
            progress(f"run {run + 1}/{cfg.n_runs}")
        placement = place(cfg, layout, run)
        all_spots.append(placement.spots)
        all_ues.append(placement.ues)
        for policy in policies:
            res = results[policy]
            if policy == "none":
                res.fields.append(omni.e_total)
                continue
            beams = synthesize(policy, cfg, layout, placement.spots)
            res.beams.append(beams)
            res.fields.append(exposure_grid(beams, geom, consts, threads).e_total)
            res.throughput.append(evaluate_throughput(beams, layout.sectors, placement.ues, cfg,
                                                      placement.shadow_db))
            if run == 0:
                res.overlap = overlap_grid(beams, geom, threads)
    return ScenarioResult(cfg, layout, grid, results, all_spots, all_ues)


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    policies: tuple[str, ...] = POLICIES
    sweep: tuple[str, tuple[float, ...]] | None = None
    out: Path | None = None
    threads: int = 1
    per_run_grids: bool = False

    def validate(self) -> list[str]:
        errors = []
        if not self.policies:
            errors.append("at least one policy is required")
        for p in self.policies:
            if p not in POLICIES:
                errors.append(f"unknown policy '{p}'")
        if self.sweep is not None:
            name, values = self.sweep
            if name not in SWEEP_PARAMS:
                errors.append(f"sweep parameter must be one of {SWEEP_PARAMS}")
            if not values:
                errors.append("sweep value list must be non-empty")
        configs = [self.scenario] if errors else list(self.scenarios().values())
        for cfg in configs:
            errors.extend(e for e in validate_config(cfg) if e not in errors)
        return errors

    def scenarios(self) -> dict[str, ScenarioConfig]:
        if self.sweep is None:
            return {"default": self.scenario}
        name, values = self.sweep
        out = {}
        extra = {}
        if name == "sector_side_L" and self.scenario.ue_density_mode == "fixed_density":
            extra["density_reference_side"] = (self.scenario.density_reference_side
                                               or max(values))
        for v in values:
            out[f"{name}={v:g}"] = self.scenario.replace(**{name: float(v)}, **extra)
        return out


def run_experiment(spec: ExperimentSpec,
                   progress: Callable[[str], None] | None = None) -> dict[str, ScenarioResult]:
    """Simulate every sweep value and, if ``spec.out`` is set, write the artifacts."""
    results = {}
    for tag, cfg in spec.scenarios().items():
        log.info("simulating %s", tag)
        step = (lambda msg, tag=tag: progress(f"{tag}: {msg}")) if progress else None
        results[tag] = simulate(cfg, spec.policies, spec.threads, step)
        if spec.out is not None:
            write_outputs(results[tag], Path(spec.out) / tag, spec.per_run_grids)
    if spec.out is not None:
        write_summary(results, Path(spec.out) / "summary.csv")
        write_manifest(spec, Path(spec.out) / "manifest.json")
    return results


def write_outputs(result: ScenarioResult, out: Path, per_run_grids: bool = False) -> None:
    cfg = result.cfg
    out.mkdir(parents=True, exist_ok=True)
    write_scenario_csv(out / "scenario.csv", result.layout, result.spots[0], result.ues[0])
    central = [d for d in result.spots[0]
               if result.layout.sectors[d.serving_sector].gnb_id == result.layout.central_gnb.id]
    for policy, res in result.policies.items():
        pdir = out / policy
        pdir.mkdir(exist_ok=True)
        mean = res.mean_field(cfg.emf_average)
        write_ecdf_csv(pdir / "ecdf_emf.csv", ecdf(mean))
        write_grid_csv(pdir / "grid_avg.csv", result.grid, {"e_mean": mean})
        circle = cfg.epsilon if policy == "pencil" else cfg.reference_circle_epsilon
        rows = spot_exposure_table(central, result.layout.sectors, result.grid, res.fields[0],
                                   circle, cfg.uncertainty_radius_mode)
        write_spot_emf_csv(pdir / "spot_emf.csv", rows)
        if per_run_grids:
            for run, e in enumerate(res.fields):
                write_grid_csv(pdir / f"grid_run{run:02d}.csv", result.grid,
                               {"s_total": e * e / 377.0, "e_total": e})
        if policy == "none":
            continue
        write_ecdf_csv(pdir / "ecdf_throughput.csv", ecdf(res.pooled_throughput() / 1e6))
        write_throughput_csv(pdir / "ue_throughput.csv", res.throughput, cfg)
        write_beams_csv(pdir / "beams.csv", res.beams)
        if len(res.beams) >= 2:
            write_widths_csv(pdir / "widths.csv", width_statistics(res.beams))
        if res.overlap is not None:
            write_grid_csv(pdir / "overlap_grid.csv", result.grid, {"count": res.overlap})


SUMMARY_FIELDS = (
    ["tag", "policy", "runs", "emf_max", "emf_median"]
    + [f"emf_d{i}" for i in range(1, 10)]
    + ["thr_median_mbps", "thr_frac_over_100"] + [f"thr_d{i}" for i in range(1, 10)]
    + ["width_st_mean", "width_tl_mean"]
)


def summary_rows(results: dict[str, ScenarioResult]) -> list[dict[str, str]]:
    rows = []
    for tag, result in results.items():
        for policy, res in result.policies.items():
            mean = res.mean_field(result.cfg.emf_average)
            dist = ecdf(mean)
            row = {"tag": tag, "policy": policy, "runs": str(len(res.fields)),
                   "emf_max": f"{mean.max():.6g}", "emf_median": f"{np.median(mean):.6g}"}
            row.update({f"emf_d{i}": f"{v:.6g}" for i, v in enumerate(dist.deciles(), 1)})
            if res.throughput:
                t = res.pooled_throughput() / 1e6
                tdist = ecdf(t)
                row["thr_median_mbps"] = f"{np.median(t):.6g}"
                row["thr_frac_over_100"] = f"{np.mean(t > 100.0):.6g}"
                row.update({f"thr_d{i}": f"{v:.6g}" for i, v in enumerate(tdist.deciles(), 1)})
                widths = [b for beams in res.beams for b in beams]
                row["width_st_mean"] = f"{np.mean([b.width_st for b in widths]):.6g}"
                row["width_tl_mean"] = f"{np.mean([b.width_tl for b in widths]):.6g}"
            rows.append(row)
    return rows


def write_summary(results: dict[str, ScenarioResult], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_FIELDS, restval="", lineterminator="\n")
        w.writeheader()
        w.writerows(summary_rows(results))


def write_manifest(spec: ExperimentSpec, path: Path) -> None:
    manifest = {
        "tool": "pencilbeam",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "backend": kernels.BACKEND,
        "seed": spec.scenario.seed,
        "policies": list(spec.policies),
        "sweep": None if spec.sweep is None else {"parameter": spec.sweep[0],
                                                  "values": list(spec.sweep[1])},
        "scenarios": {tag: {"digest": cfg.digest(), "config": cfg.to_dict()}
                      for tag, cfg in spec.scenarios().items()},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
