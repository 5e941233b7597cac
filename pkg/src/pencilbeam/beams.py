"""Traffic-beam synthesis: localization-aware pencil tuning and the
fixed-width baseline."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import distances, interception_points, relative_angles
from .scenario import DeploymentSpot, Sector


@dataclass(frozen=True)
class Beam:
    spot_id: int
    sector_id: int
    active: bool
    steering: float
    tilting: float
    width_st: float
    width_tl: float
    # 3D distance from the sector to the far interception point; bounds the
    # beam cone used for overlap counting.
    reach: float = math.inf


def law_of_cosines_angle(a: float, b: float, c: float) -> float:
    """Angle in degrees between sides ``a`` and ``b`` of a triangle with
    opposite side ``c``.

    Evaluated in Kahan's cancellation-free arrangement; the textbook
    ``acos((a^2 + b^2 - c^2) / 2ab)`` loses about half the digits on the
    needle-thin triangles of distant spots.
    """
    if a < b:
        a, b = b, a
    if b >= c:
        mu = c - (a - b)
    else:
        mu = b - (a - c)
    num = ((a - b) + c) * mu
    den = (a + (b + c)) * ((a - c) + b)
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return 180.0
    return math.degrees(2.0 * math.atan(math.sqrt(num / den)))


def pencil_widths(sector_pos, spot_pos, epsilon: float,
                  radius_mode: str = "diameter") -> tuple[float, float, float]:
    """Unclamped steering/tilting widths and reach for one (spot, sector).

    The horizontal width is the apex angle of the isosceles triangle formed by
    the sector and the two tangent contact points; the vertical width is the
    apex angle of the triangle formed by the sector and the near/far points
    on the sector-to-spot line.
    """
    pts = interception_points(sector_pos, spot_pos, epsilon, radius_mode)
    lam_hc, _ = distances(pts.i_west, sector_pos)
    lam_hb, _ = distances(pts.i_east, sector_pos)
    lam_ha, _ = distances(pts.i_west, pts.i_east)
    width_st = law_of_cosines_angle(lam_hc, lam_hb, lam_ha)

    _, lam_vc = distances(pts.i_north, sector_pos)
    _, lam_vb = distances(pts.i_south, sector_pos)
    _, chord = distances(pts.i_north, pts.i_south)
    width_tl = law_of_cosines_angle(lam_vc, lam_vb, chord)
    return width_st, width_tl, lam_vc


def _covered_pairs(sectors: Sequence[Sector], spots: Sequence[DeploymentSpot]):
    for s in sectors:
        for d in spots:
            if d.serving_sector == s.id:
                yield s, d


def tune_pencil_beams(sectors: Sequence[Sector], spots: Sequence[DeploymentSpot],
                      epsilon: float, alpha_st_min: float, alpha_tl_min: float,
                      radius_mode: str = "diameter") -> list[Beam]:
    """One pencil beam per covered spot, sized to its uncertainty circle."""
    beams = []
    for s, d in _covered_pairs(sectors, spots):
        steering, tilting = relative_angles(s.position, d.position)
        width_st, width_tl, reach = pencil_widths(s.position, d.position, epsilon, radius_mode)
        beams.append(Beam(d.id, s.id, True, steering, tilting,
                          max(width_st, alpha_st_min), max(width_tl, alpha_tl_min), reach))
    return beams


def fixed_width_beams(sectors: Sequence[Sector], spots: Sequence[DeploymentSpot],
                      alpha_st_fixed: float, alpha_tl_fixed: float,
                      epsilon: float | None = None, radius_mode: str = "diameter") -> list[Beam]:
    """Beams steered like the pencil ones but with constant widths.

    ``epsilon`` only sets each beam's reach for overlap counting.
    """
    beams = []
    for s, d in _covered_pairs(sectors, spots):
        steering, tilting = relative_angles(s.position, d.position)
        if epsilon is None:
            reach = distances(s.position, d.position)[1]
        else:
            reach = pencil_widths(s.position, d.position, epsilon, radius_mode)[2]
        beams.append(Beam(d.id, s.id, True, steering, tilting,
                          float(alpha_st_fixed), float(alpha_tl_fixed), reach))
    return beams


@dataclass(frozen=True, eq=False)
class BeamArrays:
    """Column view of active beams, in the order the kernels sum them."""

    spot: np.ndarray
    sector: np.ndarray
    steering: np.ndarray
    tilting: np.ndarray
    width_st: np.ndarray
    width_tl: np.ndarray
    reach: np.ndarray

    def __len__(self) -> int:
        return len(self.sector)


def beam_arrays(beams: Sequence[Beam]) -> BeamArrays:
    active = [b for b in beams if b.active]
    return BeamArrays(
        spot=np.array([b.spot_id for b in active], dtype=np.int64),
        sector=np.array([b.sector_id for b in active], dtype=np.int64),
        steering=np.array([b.steering for b in active], dtype=float),
        tilting=np.array([b.tilting for b in active], dtype=float),
        width_st=np.array([b.width_st for b in active], dtype=float),
        width_tl=np.array([b.width_tl for b in active], dtype=float),
        reach=np.array([b.reach for b in active], dtype=float),
    )


def write_beams_csv(path, beams_by_run: Sequence[Sequence[Beam]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "spot_id", "sector_id", "steering", "tilting", "width_st", "width_tl"])
        for run, beams in enumerate(beams_by_run):
            for b in beams:
                w.writerow([run, b.spot_id, b.sector_id, f"{b.steering:.9g}",
                            f"{b.tilting:.9g}", f"{b.width_st:.9g}", f"{b.width_tl:.9g}"])
