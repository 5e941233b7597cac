"""Aggregation over runs and the derived metrics reported per experiment."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .beams import Beam, BeamArrays, beam_arrays
from .config import uncertainty_radius
from .emf import GridGeometry
from .geometry import Point3, distances, relative_angles, wrap_offset
from .scenario import DeploymentSpot, MeasurementGrid, Sector

Z95 = 1.959963984540054


@dataclass(frozen=True, eq=False)
class Ecdf:
    values: np.ndarray
    fractions: np.ndarray

    def __call__(self, x):
        """Fraction of samples <= ``x``."""
        idx = np.searchsorted(self.values, x, side="right")
        return np.asarray(idx) / len(self.values)

    def quantile(self, q):
        """Smallest sample ``v`` with ``F(v) >= q``."""
        q = np.asarray(q, dtype=float)
        idx = np.ceil(q * len(self.values) - 1e-9).astype(int) - 1
        return self.values[np.clip(idx, 0, len(self.values) - 1)]

    def deciles(self) -> np.ndarray:
        return self.quantile(np.arange(1, 10) / 10.0)


def ecdf(samples) -> Ecdf:
    values = np.sort(np.asarray(samples, dtype=float).ravel(), kind="stable")
    if values.size == 0:
        raise ValueError("ecdf of an empty sample")
    n = len(values)
    return Ecdf(values, np.arange(1, n + 1) / n)


def average_field_over_runs(fields: Sequence[np.ndarray], mode: str = "field") -> np.ndarray:
    """Per-spot mean field strength in V/m across runs.

    ``mode="power"`` averages the power density instead and converts the mean
    back to field strength.
    """
    stack = np.stack([np.asarray(f, dtype=float) for f in fields])
    if stack.shape[0] == 0:
        raise ValueError("no runs to average")
    if mode == "field":
        return stack.mean(axis=0)
    if mode == "power":
        return np.sqrt((stack * stack).mean(axis=0))
    raise ValueError(f"unknown averaging mode {mode!r}")


def circle_mask(grid: MeasurementGrid, spot: DeploymentSpot | Point3, epsilon: float,
                radius_mode: str = "diameter") -> np.ndarray:
    p = spot.position if isinstance(spot, DeploymentSpot) else spot
    r = uncertainty_radius(epsilon, radius_mode)
    return np.hypot(grid.x - p[0], grid.y - p[1]) <= r + 1e-9


def spot_circle_average(grid: MeasurementGrid, values: np.ndarray, spot: DeploymentSpot | Point3,
                        epsilon: float, radius_mode: str = "diameter") -> float:
    """Mean of ``values`` over grid spots inside the uncertainty circle of ``spot``."""
    inside = circle_mask(grid, spot, epsilon, radius_mode)
    if not inside.any():
        raise ValueError("no spots in radius")
    return float(np.mean(np.asarray(values)[inside]))


def in_beam_cone(beam: Beam, sector: Sector, m: Point3) -> bool:
    steer, tilt = relative_angles(sector.position, m)
    if abs(wrap_offset(steer - beam.steering)) > beam.width_st / 2:
        return False
    if abs(tilt - beam.tilting) > beam.width_tl / 2:
        return False
    return distances(sector.position, m)[1] <= beam.reach


def overlap_count(beams: Sequence[Beam], sectors: Sequence[Sector], m: Point3) -> int:
    """Number of beams whose 3 dB cone, cut at the beam's reach, contains ``m``."""
    return sum(1 for b in beams if b.active and in_beam_cone(b, sectors[b.sector_id], m))


def overlap_grid(beams: Sequence[Beam] | BeamArrays, geom: GridGeometry, threads: int = 1,
                 backend: str | None = None) -> np.ndarray:
    arr = beams if isinstance(beams, BeamArrays) else beam_arrays(beams)
    impl = kernels.backend(backend)
    return impl.overlap_counts(geom.steering, geom.tilting, geom.d3sq, arr.sector,
                               arr.steering, arr.tilting, arr.width_st, arr.width_tl,
                               arr.reach, threads)


@dataclass(frozen=True)
class WidthSummary:
    plane: str
    mean: float
    ci_low: float
    ci_high: float
    n: int

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2


def mean_ci(samples) -> tuple[float, float, float]:
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    if len(x) < 2:
        return mean, mean, mean
    half = Z95 * float(x.std(ddof=1)) / math.sqrt(len(x))
    return mean, mean - half, mean + half


def width_statistics(beams_by_run: Sequence[Sequence[Beam]]) -> dict[str, WidthSummary]:
    """Mean and normal-approximation 95% CI of beam widths pooled over runs."""
    if len(beams_by_run) < 2:
        raise ValueError("width statistics need at least two runs")
    pooled = [b for beams in beams_by_run for b in beams if b.active]
    out = {}
    for plane, attr in (("steering", "width_st"), ("tilting", "width_tl")):
        mean, lo, hi = mean_ci([getattr(b, attr) for b in pooled])
        out[plane] = WidthSummary(plane, mean, lo, hi, len(pooled))
    return out


def spot_exposure_table(spots: Sequence[DeploymentSpot], sectors: Sequence[Sector],
                        grid: MeasurementGrid, values: np.ndarray, epsilon: float,
                        radius_mode: str = "diameter") -> list[tuple[int, int, int, float, float, int]]:
    """Circle-averaged field per spot, nearest-to-sector first.

    Rows are ``(rank, spot_id, sector_id, distance, e_avg, n_points)``.  A
    circle that holds no grid spot (coarse grids) yields ``e_avg = nan``.
    """
    values = np.asarray(values)
    rows = []
    for d in spots:
        s = sectors[d.serving_sector]
        dist = distances(s.position, d.position)[0]
        inside = circle_mask(grid, d, epsilon, radius_mode)
        n = int(inside.sum())
        e = float(np.mean(values[inside])) if n else math.nan
        rows.append((dist, d.id, d.serving_sector, e, n))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [(rank, spot_id, sector_id, dist, e, n)
            for rank, (dist, spot_id, sector_id, e, n) in enumerate(rows)]


def write_ecdf_csv(path, dist: Ecdf) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "fraction"])
        for v, f in zip(dist.values, dist.fractions):
            w.writerow([f"{v:.9g}", f"{f:.9g}"])


def write_widths_csv(path, stats: dict[str, WidthSummary]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["plane", "mean", "ci_low", "ci_high", "n"])
        for s in stats.values():
            w.writerow([s.plane, f"{s.mean:.9g}", f"{s.ci_low:.9g}", f"{s.ci_high:.9g}", s.n])


def write_spot_emf_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "spot_id", "sector_id", "distance", "e_avg", "n_points"])
        for rank, spot_id, sector_id, dist, e, n in rows:
            w.writerow([rank, spot_id, sector_id, f"{dist:.9g}", f"{e:.9g}", n])
