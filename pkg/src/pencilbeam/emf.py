"""Far-field exposure from deployed traffic beams (point-source model)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .beams import Beam, BeamArrays, beam_arrays
from .config import ScenarioConfig
from .geometry import GeometryError, Point3, distances, relative_angles, relative_angles_array, wrap_offset
from .scenario import Gnb, MeasurementGrid, Sector

Z_FREE_SPACE = 377.0


@dataclass(frozen=True)
class RadioConstants:
    p_element: float
    g_max_linear: float
    az_floor: float = 25.0
    el_floor: float = 20.0
    z_impedance: float = Z_FREE_SPACE

    @property
    def p_eirp(self) -> float:
        return self.p_element * self.g_max_linear

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "RadioConstants":
        return cls(cfg.p_element, cfg.g_max_linear, cfg.front_to_back, cfg.side_lobe_limit)


@dataclass(frozen=True, eq=False)
class ExposureGrid:
    s_total: np.ndarray
    e_total: np.ndarray


def field_strength(s_total, z_impedance: float = Z_FREE_SPACE):
    """Field strength in V/m from power density in W/m^2."""
    return np.sqrt(np.asarray(s_total) * z_impedance)


def pattern_attenuation(angle_offset, width, floor):
    """Parabolic pattern attenuation in dB, limited to ``-floor``."""
    q = np.asarray(angle_offset, dtype=float) / width
    return -np.minimum(12.0 * q * q, floor)


def numeric_gain(a_az, a_el):
    return (10.0 ** ((np.asarray(a_az) + np.asarray(a_el)) / 10.0)) ** 2


def beam_power_density(beam: Beam, sector: Sector, m: Point3, consts: RadioConstants) -> float:
    """Power density at ``m`` radiated by one beam, W/m^2."""
    _, d3 = distances(sector.position, m)
    if d3 == 0.0:
        raise GeometryError("co-located: measurement spot coincides with the sector")
    try:
        steer, tilt = relative_angles(sector.position, m)
    except GeometryError:
        steer, tilt = beam.steering, 90.0
    a_az = pattern_attenuation(wrap_offset(steer - beam.steering), beam.width_st, consts.az_floor)
    a_el = pattern_attenuation(tilt - beam.tilting, beam.width_tl, consts.el_floor)
    gain = float(numeric_gain(a_az, a_el))
    return consts.p_eirp * gain / (4.0 * math.pi * d3 * d3)


def total_field(beams: Sequence[Beam], sectors: Sequence[Sector], m: Point3,
                consts: RadioConstants) -> tuple[float, float]:
    """Total power density and field strength at one spot (scalar reference path)."""
    s_total = 0.0
    for b in beams:
        if b.active:
            s_total += beam_power_density(b, sectors[b.sector_id], m, consts)
    return s_total, math.sqrt(s_total * consts.z_impedance)


@dataclass(frozen=True, eq=False)
class GridGeometry:
    """Angles and squared 3D distances from every sector to every grid spot."""

    steering: np.ndarray
    tilting: np.ndarray
    d3sq: np.ndarray

    @classmethod
    def build(cls, sectors: Sequence[Sector], grid: MeasurementGrid) -> "GridGeometry":
        n_s, n_m = len(sectors), len(grid)
        steer = np.empty((n_s, n_m))
        tilt = np.empty((n_s, n_m))
        d3sq = np.empty((n_s, n_m))
        for i, s in enumerate(sectors):
            p = s.position
            st, tl, _, d3 = relative_angles_array(p.x, p.y, p.z, grid.x, grid.y, grid.z)
            steer[i], tilt[i], d3sq[i] = st, tl, d3 * d3
        return cls(steer, tilt, d3sq)


def exposure_grid(beams: Sequence[Beam] | BeamArrays, geom: GridGeometry,
                  consts: RadioConstants, threads: int = 1,
                  backend: str | None = None) -> ExposureGrid:
    """Total exposure on every grid spot from all active beams."""
    arr = beams if isinstance(beams, BeamArrays) else beam_arrays(beams)
    impl = kernels.backend(backend)
    s_total = impl.emf_accumulate(
        geom.steering, geom.tilting, geom.d3sq, arr.sector, arr.steering, arr.tilting,
        arr.width_st, arr.width_tl, consts.p_eirp, consts.az_floor, consts.el_floor, threads)
    return ExposureGrid(s_total, field_strength(s_total, consts.z_impedance))


def no_beamforming_field(gnbs: Sequence[Gnb], points, p_max_gnb: float,
                         g_max_linear: float) -> ExposureGrid:
    """Exposure from omnidirectional gNBs radiating at full power.

    ``points`` is a :class:`MeasurementGrid` or a single :class:`Point3`.
    """
    if isinstance(points, MeasurementGrid):
        x, y, z = points.x, points.y, points.z
    else:
        x, y, z = (np.asarray([v], dtype=float) for v in points)
    s_total = np.zeros(np.broadcast(x, y).shape)
    for g in gnbs:
        p = g.position
        d3sq = (x - p.x) ** 2 + (y - p.y) ** 2 + (z - p.z) ** 2
        s_total += p_max_gnb * g_max_linear / (4.0 * math.pi * d3sq)
    return ExposureGrid(s_total, field_strength(s_total))


def write_grid_csv(path, grid: MeasurementGrid, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", *names])
        cols = [columns[n] for n in names]
        for i in range(len(grid)):
            w.writerow([f"{grid.x[i]:.6g}", f"{grid.y[i]:.6g}", *(fmt(c[i]) for c in cols)])


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"
