"""Experiment configuration: dataclasses plus a strict key-value file parser.

Config files use INI-style sections. Unknown sections or keys are rejected
outright; a typo in a physics config should fail loudly, not silently fall
back to a default.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .correction import LensSpec
from .errors import ConfigError


@dataclass(frozen=True)
class CrystalConfig:
    name: str = "bbo"
    length_mm: float = 10.0
    cut_angle_deg: float | None = None   # None: stock cut from the data file
    data_dir: str | None = None


@dataclass(frozen=True)
class PumpConfig:
    wavelength_nm: float = 405.0
    waist_um: float = 118.0
    power_mw: float = 40.0


@dataclass(frozen=True)
class WavelengthConfig:
    signal_nm: float = 780.0
    idler_nm: float | None = None        # None: derived from energy conservation


@dataclass(frozen=True)
class GeometryConfig:
    emission_angle_deg: float = 1.5      # external signal angle
    plane_z_mm: float = 75.0             # camera distance past the exit face
    rho_override_deg: float | None = None


@dataclass(frozen=True)
class RenderConfig:
    mode: str = "geometric"              # geometric | wave
    image_px: int = 512
    pitch_um: float = 0.0                # 0: sized automatically from the mode extent
    n_depth: int = 256
    n_azimuth: int = 1536
    phase_matching_bandwidth: bool = False
    bandwidth_nodes: int = 161
    bandwidth_reach: float = 2.2
    pump_waist_blur: bool = False
    wave_k_grid: int = 384
    wave_idler_sum: str = "stationary"   # stationary | full
    wave_idler_grid: int = 24


@dataclass(frozen=True)
class ExperimentConfig:
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    pump: PumpConfig = field(default_factory=PumpConfig)
    wavelengths: WavelengthConfig = field(default_factory=WavelengthConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    lens: LensSpec | None = None
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        c = self.crystal
        if c.length_mm <= 0:
            raise ConfigError("crystal.length_mm must be positive")
        if self.pump.wavelength_nm <= 0 or self.pump.waist_um <= 0 or self.pump.power_mw <= 0:
            raise ConfigError("pump fields must be positive")
        if self.wavelengths.signal_nm <= self.pump.wavelength_nm:
            raise ConfigError("wavelengths.signal_nm must exceed the pump wavelength")
        g = self.geometry
        if not 0.0 <= g.emission_angle_deg <= 10.0:
            raise ConfigError("geometry.emission_angle_deg must lie in [0, 10] degrees")
        if g.plane_z_mm < 0:
            raise ConfigError("geometry.plane_z_mm must be non-negative")
        r = self.render
        if r.mode not in ("geometric", "wave"):
            raise ConfigError(f"render.mode must be 'geometric' or 'wave', got {r.mode!r}")
        if r.image_px < 16:
            raise ConfigError("render.image_px must be at least 16")
        if r.pitch_um < 0:
            raise ConfigError("render.pitch_um must be >= 0 (0 selects auto)")
        if r.n_depth < 2 or r.n_azimuth < 2:
            raise ConfigError("render.n_depth and render.n_azimuth must be at least 2")
        if r.wave_idler_sum not in ("stationary", "full"):
            raise ConfigError("render.wave_idler_sum must be 'stationary' or 'full'")
        return self

    # --- sweep / correction helpers -------------------------------------
    def with_override(self, parameter: str, value: float) -> "ExperimentConfig":
        if parameter == "crystal_length":
            return replace(self, crystal=replace(self.crystal, length_mm=value))
        if parameter == "emission_angle":
            return replace(self, geometry=replace(self.geometry, emission_angle_deg=value))
        if parameter == "pump_waist":
            return replace(self, pump=replace(self.pump, waist_um=value))
        raise ConfigError(f"unknown sweep parameter {parameter!r}")

    def with_plane_z(self, plane_z_m: float) -> "ExperimentConfig":
        return replace(self, geometry=replace(self.geometry, plane_z_mm=plane_z_m * 1e3))

    def without_lens(self) -> "ExperimentConfig":
        return replace(self, lens=None)


_SCHEMA = {
    "crystal": {"name": str, "length_mm": float, "cut_angle_deg": float, "data_dir": str},
    "pump": {"wavelength_nm": float, "waist_um": float, "power_mw": float},
    "wavelengths": {"signal_nm": float, "idler_nm": float},
    "geometry": {"emission_angle_deg": float, "plane_z_mm": float, "rho_override_deg": float},
    "render": {
        "mode": str, "image_px": int, "pitch_um": float, "n_depth": int,
        "n_azimuth": int, "phase_matching_bandwidth": bool, "bandwidth_nodes": int,
        "bandwidth_reach": float, "pump_waist_blur": bool, "wave_k_grid": int,
        "wave_idler_sum": str, "wave_idler_grid": int,
    },
    "lens": {"focal_mm": float, "distance_mm": float, "offset_x_um": float, "offset_y_um": float},
    "output": {"dir": str},
}

_SECTION_TYPES = {
    "crystal": CrystalConfig,
    "pump": PumpConfig,
    "wavelengths": WavelengthConfig,
    "geometry": GeometryConfig,
    "render": RenderConfig,
}


def _coerce(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    sections: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"{path}: unknown section [{section}]; expected one of "
                f"{sorted(_SCHEMA)}"
            )
        values = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section}]; expected one of "
                    f"{sorted(_SCHEMA[section])}"
                )
            values[key] = _coerce(section, key, raw)
        sections[section] = values

    kwargs = {}
    for section, cls in _SECTION_TYPES.items():
        kwargs[section] = cls(**sections.get(section, {}))
    lens = LensSpec(**sections["lens"]) if "lens" in sections else None
    output_dir = sections.get("output", {}).get("dir", "out")
    return ExperimentConfig(lens=lens, output_dir=output_dir, **kwargs).validate()
