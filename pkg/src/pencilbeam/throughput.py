"""Downlink SINR and Shannon throughput of the served UEs."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .beams import Beam, BeamArrays, beam_arrays
from .config import ScenarioConfig
from .emf import pattern_attenuation
from .geometry import relative_angles, relative_angles_array, wrap_offset
from .scenario import Sector, UeLocation

SPEED_OF_LIGHT = 299_792_458.0
MIN_DISTANCE = 10.0
# UMi street canyon shadow-fading standard deviations, dB
SHADOW_STD = {"los": 4.0, "nlos": 7.82}


def path_loss(d2, h_bs: float, h_ut: float, frequency: float, mode: str = "nlos"):
    """UMi street canyon path loss in dB (3GPP TR 38.901, no shadowing).

    ``d2`` is the horizontal distance; values below 10 m are clamped to the
    model's validity range.  ``mode="nlos"`` returns max(LOS, NLOS').
    """
    d2 = np.maximum(np.asarray(d2, dtype=float), MIN_DISTANCE)
    dh = h_bs - h_ut
    d3 = np.sqrt(d2 * d2 + dh * dh)
    fc = frequency / 1e9
    d_bp = 4.0 * (h_bs - 1.0) * (h_ut - 1.0) * frequency / SPEED_OF_LIGHT
    pl1 = 32.4 + 21.0 * np.log10(d3) + 20.0 * np.log10(fc)
    pl2 = (32.4 + 40.0 * np.log10(d3) + 20.0 * np.log10(fc)
           - 9.5 * np.log10(d_bp * d_bp + dh * dh))
    los = np.where(d2 <= d_bp, pl1, pl2)
    if mode == "los":
        return los
    if mode != "nlos":
        raise ValueError(f"unknown propagation mode {mode!r}")
    nlos = 22.4 + 35.3 * np.log10(d3) + 21.3 * np.log10(fc) - 0.3 * (h_ut - 1.5)
    return np.maximum(los, nlos)


def noise_power_dbm(bandwidth: float, noise_figure: float, density: float = -174.0) -> float:
    return density + 10.0 * math.log10(bandwidth) + noise_figure


def beamforming_pattern(angle_offset, width):
    """Linear beamforming gain factor sinc^2(offset / (1.13 width)).

    Uses the normalized sinc, so the half-width offset lands at -3 dB.
    """
    return np.sinc(np.asarray(angle_offset, dtype=float) / (1.13 * width)) ** 2


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(lin)


def received_power(beam: Beam, sector: Sector, ue: UeLocation, cfg: ScenarioConfig,
                   shadow_db: float = 0.0) -> float:
    """Power received at ``ue`` from ``beam`` in dBm (``-inf`` at a pattern null)."""
    steer, tilt = relative_angles(sector.position, ue.position)
    d2 = math.hypot(ue.position.x - sector.position.x, ue.position.y - sector.position.y)
    off_st = wrap_offset(steer - beam.steering)
    off_tl = tilt - beam.tilting
    pl = float(path_loss(d2, sector.position.z, ue.position.z, cfg.frequency, cfg.los_mode))
    a_az = float(pattern_attenuation(off_st, beam.width_st, cfg.front_to_back))
    a_el = float(pattern_attenuation(off_tl, beam.width_tl, cfg.side_lobe_limit))
    b = float(beamforming_pattern(off_st, beam.width_st) * beamforming_pattern(off_tl, beam.width_tl))
    if b == 0.0:
        return -math.inf
    return (cfg.p_tx_dbm - pl - shadow_db + a_az + a_el + cfg.g_tx_element
            + 10.0 * math.log10(b) + cfg.g_bf_db)


def received_power_matrix(beams: BeamArrays, sectors: Sequence[Sector], ue_xyz: np.ndarray,
                          cfg: ScenarioConfig, shadow_db: np.ndarray | None = None) -> np.ndarray:
    """Linear received power in mW, shape (n_ue, n_beam).

    ``shadow_db`` optionally holds one shadow-fading loss per (UE, sector).
    """
    n_u = len(ue_xyz)
    n_s = len(sectors)
    steer = np.empty((n_u, n_s))
    tilt = np.empty((n_u, n_s))
    pl = np.empty((n_u, n_s))
    for i, s in enumerate(sectors):
        p = s.position
        st, tl, d2, _ = relative_angles_array(p.x, p.y, p.z, ue_xyz[:, 0], ue_xyz[:, 1], ue_xyz[:, 2])
        steer[:, i], tilt[:, i] = st, tl
        pl[:, i] = path_loss(d2, p.z, ue_xyz[:, 2], cfg.frequency, cfg.los_mode)
    if shadow_db is not None:
        pl = pl + shadow_db

    sec = beams.sector
    off_st = wrap_offset(steer[:, sec] - beams.steering)
    off_tl = tilt[:, sec] - beams.tilting
    a = (pattern_attenuation(off_st, beams.width_st, cfg.front_to_back)
         + pattern_attenuation(off_tl, beams.width_tl, cfg.side_lobe_limit))
    p_db = cfg.p_tx_dbm - pl[:, sec] + a + cfg.g_tx_element + cfg.g_bf_db
    bf = beamforming_pattern(off_st, beams.width_st) * beamforming_pattern(off_tl, beams.width_tl)
    return db_to_linear(p_db) * bf


def sinr(rx_mw: np.ndarray, serving: int, beam_sector: np.ndarray, noise_mw: float,
         include_intra: bool = True) -> float:
    """SINR of the beam at index ``serving`` given one UE's received powers.

    Interference from the serving sector's other beams is counted only when
    ``include_intra``; every beam of another sector always interferes.
    """
    same = beam_sector == beam_sector[serving]
    others = same.copy()
    others[serving] = False
    inter = float(np.sum(rx_mw[~same]))
    intra = float(np.sum(rx_mw[others])) if include_intra else 0.0
    return float(rx_mw[serving]) / (intra + inter + noise_mw)


def shannon_throughput(sinr_value, bandwidth: float):
    """Shannon capacity in bit/s."""
    return bandwidth * np.log2(1.0 + np.asarray(sinr_value, dtype=float))


@dataclass(frozen=True, eq=False)
class ThroughputResult:
    spot_id: np.ndarray
    sector_id: np.ndarray
    sinr: np.ndarray
    throughput: np.ndarray
    pl_clamped: np.ndarray

    @property
    def sinr_db(self) -> np.ndarray:
        return linear_to_db(self.sinr)


def evaluate_throughput(beams: Sequence[Beam] | BeamArrays, sectors: Sequence[Sector],
                        ues: Sequence[UeLocation], cfg: ScenarioConfig,
                        shadow_db: np.ndarray | None = None) -> ThroughputResult:
    """Per-UE SINR and throughput, each UE served by the beam on its spot."""
    arr = beams if isinstance(beams, BeamArrays) else beam_arrays(beams)
    index = {int(spot): i for i, spot in enumerate(arr.spot)}
    ue_xyz = np.array([[u.position.x, u.position.y, u.position.z] for u in ues], dtype=float)
    ue_xyz = ue_xyz.reshape(-1, 3)
    rx = received_power_matrix(arr, sectors, ue_xyz, cfg, shadow_db)
    noise_mw = float(db_to_linear(cfg.noise_dbm))

    n = len(ues)
    out_sinr = np.empty(n)
    serving_sector = np.empty(n, dtype=np.int64)
    clamped = np.zeros(n, dtype=bool)
    for k, u in enumerate(ues):
        b = index[u.spot_id]
        out_sinr[k] = sinr(rx[k], b, arr.sector, noise_mw, cfg.intra_sector_interference)
        serving_sector[k] = arr.sector[b]
        s = sectors[arr.sector[b]].position
        clamped[k] = math.hypot(u.position.x - s.x, u.position.y - s.y) < MIN_DISTANCE
    return ThroughputResult(
        spot_id=np.array([u.spot_id for u in ues], dtype=np.int64),
        sector_id=serving_sector,
        sinr=out_sinr,
        throughput=shannon_throughput(out_sinr, cfg.bandwidth),
        pl_clamped=clamped,
    )


def write_throughput_csv(path, results: Sequence[ThroughputResult], cfg: ScenarioConfig) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "ue_id", "spot_id", "sector_id", "sinr_db", "throughput_mbps",
                    "los_mode", "intra_sector", "pl_clamped"])
        for run, res in enumerate(results):
            sinr_db = res.sinr_db
            for k in range(len(res.spot_id)):
                w.writerow([run, k, int(res.spot_id[k]), int(res.sector_id[k]),
                            f"{sinr_db[k]:.9g}", f"{res.throughput[k] / 1e6:.9g}",
                            cfg.los_mode, int(cfg.intra_sector_interference),
                            int(res.pl_clamped[k])])
