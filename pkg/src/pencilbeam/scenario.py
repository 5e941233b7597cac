"""Network layout and random placement of deployment spots, UEs and the
measurement grid."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import ScenarioConfig, hex_rings, uncertainty_radius
from .geometry import GeometryError, Point3, relative_angles

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Gnb:
    id: int
    position: Point3


@dataclass(frozen=True)
class Sector:
    id: int
    gnb_id: int
    position: Point3
    azimuth_start: float
    azimuth_end: float

    @property
    def width(self) -> float:
        return self.azimuth_end - self.azimuth_start


@dataclass(frozen=True)
class DeploymentSpot:
    id: int
    position: Point3
    serving_sector: int | None = None


@dataclass(frozen=True)
class UeLocation:
    spot_id: int
    position: Point3


@dataclass(frozen=True)
class MeasurementSpot:
    id: int
    position: Point3


@dataclass(frozen=True, eq=False)
class MeasurementGrid:
    """Uniform lattice of measurement spots stored column-wise."""

    x: np.ndarray
    y: np.ndarray
    z: float

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> MeasurementSpot:
        return MeasurementSpot(i, Point3(float(self.x[i]), float(self.y[i]), self.z))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


@dataclass(frozen=True)
class Layout:
    gnbs: tuple[Gnb, ...]
    sectors: tuple[Sector, ...]
    side: float
    rotation: float = 0.0

    @property
    def central_gnb(self) -> Gnb:
        return self.gnbs[0]

    def sectors_of(self, gnb_id: int) -> list[Sector]:
        return [s for s in self.sectors if s.gnb_id == gnb_id]

    def in_hexagon(self, gnb: Gnb, x, y):
        """Whether ``(x, y)`` lies in the gNB's hexagon, boundary included."""
        return in_hexagon(np.asarray(x, float) - gnb.position.x,
                          np.asarray(y, float) - gnb.position.y,
                          self.side, self.rotation)

    def serving_sector(self, point: Point3) -> int | None:
        """Index of the sector whose coverage contains ``point``.

        Ties on hexagon edges or sector boundaries go to the lowest index, so
        the sectors partition the covered area.
        """
        for gnb in self.gnbs:
            if not self.in_hexagon(gnb, point[0], point[1]):
                continue
            try:
                az, _ = relative_angles(gnb.position, Point3(point[0], point[1], 0.0))
            except GeometryError:
                return self.sectors_of(gnb.id)[0].id
            for sector in self.sectors_of(gnb.id):
                if in_azimuth_range(az, sector.azimuth_start, sector.azimuth_end):
                    return sector.id
        return None

    def check_coverage(self, spot: DeploymentSpot, sector: Sector) -> bool:
        return self.serving_sector(spot.position) == sector.id


def in_hexagon(dx, dy, side: float, rotation: float = 0.0):
    """Point-in-flat-topped-hexagon test in the hexagon's own frame."""
    if rotation:
        c, s = math.cos(math.radians(rotation)), math.sin(math.radians(rotation))
        dx, dy = c * dx + s * dy, -s * dx + c * dy
    tol = 1e-9 * side
    ax, ay = np.abs(dx), np.abs(dy)
    return (ay <= SQRT3 / 2 * side + tol) & (SQRT3 * ax + ay <= SQRT3 * side + tol)


def hexagon_radius(azimuth, side: float, rotation: float = 0.0):
    """Distance from a hexagon's center to its boundary along ``azimuth``."""
    local = np.mod(np.asarray(azimuth, float) - rotation, 60.0) - 30.0
    return SQRT3 / 2 * side / np.cos(np.radians(local))


def in_azimuth_range(az: float, start: float, end: float, tol: float = 1e-9) -> bool:
    width = end - start
    rel = (az - start) % 360.0
    return rel <= width + tol or rel >= 360.0 - tol


def build_grid(cfg: ScenarioConfig) -> Layout:
    """Place gNBs on a hexagonal lattice and split each into equal sectors."""
    rings = hex_rings(cfg.n_gnb)
    spacing = SQRT3 * cfg.sector_side_L
    dirs = [
        (spacing * math.cos(math.radians(cfg.layout_rotation + 30 + 60 * i)),
         spacing * math.sin(math.radians(cfg.layout_rotation + 30 + 60 * i)))
        for i in range(6)
    ]
    centers = [(0.0, 0.0)]
    for k in range(1, rings + 1):
        x, y = k * dirs[4][0], k * dirs[4][1]
        for i in range(6):
            for _ in range(k):
                centers.append((x, y))
                x += dirs[i][0]
                y += dirs[i][1]
    centers = centers[: cfg.n_gnb]

    gnbs = []
    sectors = []
    span = 360.0 / cfg.n_sectors_per_gnb
    for g, (x, y) in enumerate(centers):
        pos = Point3(x, y, cfg.h_sector)
        gnbs.append(Gnb(g, pos))
        for k in range(cfg.n_sectors_per_gnb):
            start = (cfg.layout_rotation + k * span) % 360.0
            sectors.append(Sector(len(sectors), g, pos, start, start + span))
    return Layout(tuple(gnbs), tuple(sectors), cfg.sector_side_L, cfg.layout_rotation)


def generate_deployment_spots(cfg: ScenarioConfig, layout: Layout,
                              streams: Iterable[np.random.Generator]) -> list[DeploymentSpot]:
    """Draw hot-spot biased deployment spots, one stream per sector.

    Angles are uniform over the sector's azimuth range and radii uniform
    between the exclusion radius and the hexagon edge, which concentrates
    spots near the site.  Draws that fall outside the sector (boundary
    round-off) are redrawn.
    """
    n = cfg.spots_per_sector()
    spots: list[DeploymentSpot] = []
    for sector, rng in zip(layout.sectors, streams):
        gnb = layout.gnbs[sector.gnb_id]
        accepted: list[tuple[float, float]] = []
        attempts = 0
        while len(accepted) < n:
            attempts += 1
            if attempts > cfg.max_sampling_attempts:
                raise RuntimeError("sampling stalled")
            need = n - len(accepted)
            az = rng.uniform(sector.azimuth_start, sector.azimuth_end, need)
            r_max = hexagon_radius(az, layout.side, layout.rotation)
            r = rng.uniform(cfg.exclusion_radius, r_max)
            xs = gnb.position.x + r * np.cos(np.radians(az))
            ys = gnb.position.y + r * np.sin(np.radians(az))
            for x, y in zip(xs, ys):
                p = Point3(float(x), float(y), cfg.h_ground)
                if math.hypot(x - gnb.position.x, y - gnb.position.y) < cfg.exclusion_radius:
                    continue
                if layout.serving_sector(p) != sector.id:
                    continue
                accepted.append((p.x, p.y))
        for x, y in accepted:
            spots.append(DeploymentSpot(len(spots), Point3(x, y, cfg.h_ground), sector.id))
    return spots


def unit_disc_offsets(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` points uniform on the unit disc by rejection from the square."""
    out = np.empty((n, 2))
    for i in range(n):
        while True:
            u, v = rng.uniform(-1.0, 1.0, 2)
            if u * u + v * v <= 1.0:
                out[i] = u, v
                break
    return out


def generate_ue_locations(spots: Sequence[DeploymentSpot], epsilon: float,
                          rng: np.random.Generator,
                          radius_mode: str = "diameter") -> list[UeLocation]:
    """One true UE position per spot, uniform over its uncertainty circle."""
    r = uncertainty_radius(epsilon, radius_mode)
    offsets = unit_disc_offsets(rng, len(spots))
    ues = []
    for spot, (u, v) in zip(spots, offsets):
        p = spot.position
        ues.append(UeLocation(spot.id, Point3(p.x + r * u, p.y + r * v, p.z)))
    return ues


def generate_measurement_grid(cfg: ScenarioConfig, layout: Layout,
                              gnb: Gnb | None = None) -> MeasurementGrid:
    """Lattice points inside a gNB hexagon and outside its exclusion zone."""
    gnb = gnb or layout.central_gnb
    res = cfg.measurement_resolution
    k = int(math.ceil(layout.side / res)) + 1
    ticks = np.arange(-k, k + 1) * res
    gx, gy = np.meshgrid(ticks, ticks, indexing="xy")
    dx, dy = gx.ravel(), gy.ravel()
    keep = in_hexagon(dx, dy, layout.side, layout.rotation)
    keep &= np.hypot(dx, dy) >= cfg.exclusion_radius
    return MeasurementGrid(gnb.position.x + dx[keep], gnb.position.y + dy[keep], cfg.h_ground)


def write_scenario_csv(path, layout: Layout, spots: Sequence[DeploymentSpot],
                       ues: Sequence[UeLocation] = (), grid: MeasurementGrid | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "id", "x", "y", "z", "serving_sector"])
        for g in layout.gnbs:
            w.writerow(["gnb", g.id, *fmt_point(g.position), ""])
        for s in layout.sectors:
            w.writerow(["sector", s.id, *fmt_point(s.position), s.id])
        for d in spots:
            w.writerow(["spot", d.id, *fmt_point(d.position),
                        "" if d.serving_sector is None else d.serving_sector])
        serving = {d.id: d.serving_sector for d in spots}
        for u in ues:
            w.writerow(["ue", u.spot_id, *fmt_point(u.position), serving.get(u.spot_id, "")])
        if grid is not None:
            for i in range(len(grid)):
                w.writerow(["measurement", i, f"{grid.x[i]:.6g}", f"{grid.y[i]:.6g}",
                            f"{grid.z:.6g}", ""])


def fmt_point(p: Point3) -> list[str]:
    return [f"{p.x:.9g}", f"{p.y:.9g}", f"{p.z:.9g}"]
