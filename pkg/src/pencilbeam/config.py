"""Scenario configuration: network layout, radio parameters and run controls."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from typing import Any

EPSILON_LEVELS = (20.0, 16.0, 8.0, 4.0, 2.0)

DENSITY_MODES = ("fixed_count", "fixed_density")
LOS_MODES = ("los", "nlos")
RADIUS_MODES = ("diameter", "radius")
AVERAGE_MODES = ("field", "power")


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    # layout
    n_gnb: int = 7
    n_sectors_per_gnb: int = 3
    sector_side_L: float = 100.0
    layout_rotation: float = 0.0
    exclusion_radius: float = 10.0
    h_sector: float = 15.0
    h_ground: float = 1.5
    # antenna array
    n_radiating_elements: int = 64
    n_spots_per_sector: int = 64
    p_tx_array: float = 200.0
    g_max: float = 15.0
    g_tx_element: float = 3.0
    front_to_back: float = 25.0
    side_lobe_limit: float = 20.0
    alpha_st_min: float = 3.0
    alpha_tl_min: float = 3.0
    alpha_st_fixed: float = 30.0
    alpha_tl_fixed: float = 30.0
    # radio
    bandwidth: float = 80e6
    frequency: float = 3.7e9
    noise_figure: float = 5.0
    thermal_noise_density: float = -174.0
    los_mode: str = "nlos"
    intra_sector_interference: bool = True
    shadow_fading: bool = False
    # localization
    epsilon: float = 2.0
    uncertainty_radius_mode: str = "diameter"
    # sampling and evaluation
    ue_density_mode: str = "fixed_count"
    density_reference_side: float | None = None
    measurement_resolution: float = 1.0
    reference_circle_epsilon: float = 2.0
    emf_average: str = "field"
    n_runs: int = 20
    seed: int = 0
    max_sampling_attempts: int = field(default=1000, repr=False)

    @property
    def p_element(self) -> float:
        """Per-element power in W (uniform split of the array power)."""
        return self.p_tx_array / self.n_radiating_elements

    @property
    def g_max_linear(self) -> float:
        return 10.0 ** (self.g_max / 10.0)

    @property
    def p_eirp(self) -> float:
        return self.p_element * self.g_max_linear

    @property
    def g_bf_db(self) -> float:
        return 10.0 * math.log10(self.n_radiating_elements)

    @property
    def p_tx_dbm(self) -> float:
        return 10.0 * math.log10(self.p_tx_array * 1e3)

    @property
    def noise_dbm(self) -> float:
        return self.thermal_noise_density + 10.0 * math.log10(self.bandwidth) + self.noise_figure

    @property
    def uncertainty_radius(self) -> float:
        return uncertainty_radius(self.epsilon, self.uncertainty_radius_mode)

    @property
    def n_sectors(self) -> int:
        return self.n_gnb * self.n_sectors_per_gnb

    def spots_per_sector(self) -> int:
        """Number of deployment spots generated in each sector.

        In ``fixed_density`` mode the count scales with the sector area and
        reaches ``n_spots_per_sector`` at ``density_reference_side``.
        """
        if self.ue_density_mode == "fixed_count":
            return self.n_spots_per_sector
        ref = self.density_reference_side or self.sector_side_L
        return max(1, int(round(self.n_spots_per_sector * (self.sector_side_L / ref) ** 2)))

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError([f"unknown config key '{k}'" for k in unknown])
        values = {}
        errors = []
        for key, raw in data.items():
            try:
                values[key] = coerce(known[key], raw)
            except (TypeError, ValueError):
                errors.append(f"{key}: cannot interpret {raw!r}")
        if errors:
            raise ConfigError(errors)
        return cls(**values)


def uncertainty_radius(epsilon: float, mode: str = "diameter") -> float:
    """Radius of the localization uncertainty circle for level ``epsilon``."""
    if mode == "diameter":
        return epsilon / 2.0
    if mode == "radius":
        return epsilon
    raise ValueError(f"unknown uncertainty_radius_mode {mode!r}")


def field_kind(f: dataclasses.Field) -> type:
    default = f.default
    if default is None:
        return float
    return type(default)


def coerce(f: dataclasses.Field, raw: Any) -> Any:
    kind = field_kind(f)
    if raw is None:
        return None
    if kind is bool:
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if kind is int:
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(raw)
        return int(raw)
    if kind is float:
        if isinstance(raw, str) and raw.strip().lower() in ("none", "null", ""):
            return None
        return float(raw)
    return str(raw)


def validate(cfg: ScenarioConfig) -> list[str]:
    """Return a list of invariant violations; empty when ``cfg`` is usable."""
    errors: list[str] = []

    def positive(name: str) -> None:
        value = getattr(cfg, name)
        if not value > 0:
            errors.append(f"{name} must be positive")

    for name in (
        "n_gnb", "n_sectors_per_gnb", "sector_side_L", "h_sector", "h_ground",
        "n_radiating_elements", "n_spots_per_sector", "p_tx_array",
        "front_to_back", "side_lobe_limit", "alpha_st_min", "alpha_tl_min",
        "alpha_st_fixed", "alpha_tl_fixed", "bandwidth", "frequency",
        "epsilon", "measurement_resolution", "reference_circle_epsilon",
        "n_runs", "max_sampling_attempts",
    ):
        positive(name)
    if cfg.exclusion_radius < 0:
        errors.append("exclusion_radius must be non-negative")
    if cfg.noise_figure < 0:
        errors.append("noise_figure must be non-negative")

    if cfg.n_gnb > 0 and not is_centered_hexagonal(cfg.n_gnb):
        errors.append("n_gnb must be a centered hexagonal number (1, 7, 19, ...)")
    if cfg.n_sectors_per_gnb > 0 and 360 % cfg.n_sectors_per_gnb:
        errors.append("n_sectors_per_gnb must divide 360")
    if cfg.n_spots_per_sector > cfg.n_radiating_elements:
        errors.append("n_spots_per_sector exceeds radiating elements")
    if cfg.h_ground >= cfg.h_sector:
        errors.append("h_ground must be below h_sector")
    if cfg.epsilon >= cfg.sector_side_L:
        errors.append("epsilon must be smaller than sector_side_L")
    for name in ("alpha_st_min", "alpha_tl_min", "alpha_st_fixed", "alpha_tl_fixed"):
        if getattr(cfg, name) >= 360:
            errors.append(f"{name} must be below 360 degrees")
    if cfg.exclusion_radius >= cfg.sector_side_L * math.sqrt(3) / 2:
        errors.append("exclusion_radius must lie inside the hexagon")

    if cfg.ue_density_mode not in DENSITY_MODES:
        errors.append(f"ue_density_mode must be one of {DENSITY_MODES}")
    elif cfg.ue_density_mode == "fixed_density":
        ref = cfg.density_reference_side
        if ref is not None and ref < cfg.sector_side_L:
            errors.append("density_reference_side must be >= sector_side_L")
    if cfg.los_mode not in LOS_MODES:
        errors.append(f"los_mode must be one of {LOS_MODES}")
    if cfg.uncertainty_radius_mode not in RADIUS_MODES:
        errors.append(f"uncertainty_radius_mode must be one of {RADIUS_MODES}")
    elif cfg.epsilon > 0 and cfg.uncertainty_radius > cfg.exclusion_radius:
        # Beam tuning needs every sector outside the spot's uncertainty circle.
        errors.append("uncertainty radius must not exceed exclusion_radius")
    if cfg.emf_average not in AVERAGE_MODES:
        errors.append(f"emf_average must be one of {AVERAGE_MODES}")
    return errors


def check(cfg: ScenarioConfig) -> ScenarioConfig:
    errors = validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def is_centered_hexagonal(n: int) -> bool:
    k = 0
    while 3 * k * (k + 1) + 1 < n:
        k += 1
    return 3 * k * (k + 1) + 1 == n


def hex_rings(n_gnb: int) -> int:
    k = 0
    while 3 * k * (k + 1) + 1 < n_gnb:
        k += 1
    return k
