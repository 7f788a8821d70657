"""From an experiment configuration to a rendered mode image.

Resolves the crystal and wavelengths, solves the phase-matching angle for the
configured emission angle, derives the walk-off, and dispatches to the
geometric or wave renderer. The geometric route optionally smears the
emission over the phase-matching angular bandwidth and blurs by the pump
waist; a correction lens can be inserted into the ray path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import modesim
from .config import ExperimentConfig
from .correction import LensSpec, apply_lens, propagate
from .crystal import (
    CrystalSpec,
    Wavelengths,
    index_ordinary,
    load_crystal,
    solve_phasematch_angle,
    walkoff_angle,
)
from .errors import ConfigError, ValidationError
from .modesim import ImageSpec, ModeImage

_GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class ModeGeometry:
    """Solved angles for one configuration."""

    crystal: CrystalSpec
    wavelengths: Wavelengths
    theta_ext: float       # external signal emission angle, rad
    theta_int: float       # internal, after Snell at the exit face
    theta_pm: float        # pump angle to the optic axis
    rho: float             # pump walk-off angle
    exit_index: float      # ordinary index at the signal wavelength


def resolve_crystal(cfg: ExperimentConfig) -> CrystalSpec:
    try:
        return load_crystal(
            cfg.crystal.name,
            length_mm=cfg.crystal.length_mm,
            cut_angle_deg=cfg.crystal.cut_angle_deg,
            data_dir=cfg.crystal.data_dir,
        )
    except ValidationError as exc:  # config-level failure: unknown name, bad file
        raise ConfigError(str(exc)) from exc


def resolve_wavelengths(cfg: ExperimentConfig) -> Wavelengths:
    if cfg.wavelengths.idler_nm is not None:
        return Wavelengths(cfg.pump.wavelength_nm, cfg.wavelengths.signal_nm,
                           cfg.wavelengths.idler_nm)
    return Wavelengths.from_pump_signal(cfg.pump.wavelength_nm, cfg.wavelengths.signal_nm)


def mode_geometry(cfg: ExperimentConfig) -> ModeGeometry:
    crystal = resolve_crystal(cfg)
    wavelengths = resolve_wavelengths(cfg)
    n_sig = index_ordinary(crystal, wavelengths.signal_nm)
    theta_ext = math.radians(cfg.geometry.emission_angle_deg)
    theta_int = math.asin(math.sin(theta_ext) / n_sig)
    theta_pm = solve_phasematch_angle(crystal, wavelengths, theta_int)
    if cfg.geometry.rho_override_deg is not None:
        rho = math.radians(cfg.geometry.rho_override_deg)
    else:
        rho = walkoff_angle(crystal, wavelengths.pump_nm, theta_pm)
    return ModeGeometry(
        crystal=crystal, wavelengths=wavelengths,
        theta_ext=theta_ext, theta_int=theta_int,
        theta_pm=theta_pm, rho=rho, exit_index=n_sig,
    )


def walkoff_extent_m(cfg: ExperimentConfig) -> float:
    """Transverse walk-off extent L tan(rho) of the configured mode."""
    geo = mode_geometry(cfg)
    return geo.crystal.length_m * math.tan(geo.rho)


def lens_image_spec(cfg: ExperimentConfig, lens: LensSpec, plane_z_m: float) -> ImageSpec:
    """Frame sized for a lens render, large enough for the lens's own offsets."""
    geo = mode_geometry(cfg)
    deltas, _ = _bandwidth(cfg, geo)
    return _image_spec(cfg, _lens_extent_m(cfg, geo, lens, plane_z_m, deltas))


def _bandwidth(cfg: ExperimentConfig, geo: ModeGeometry):
    """(delta_theta_int, weights) for the configured angular smear."""
    if not cfg.render.phase_matching_bandwidth:
        return np.array([0.0]), np.array([1.0])
    return modesim.bandwidth_nodes(
        geo.crystal, geo.wavelengths, geo.theta_pm, geo.theta_int,
        n_nodes=cfg.render.bandwidth_nodes, reach=cfg.render.bandwidth_reach,
    )


def _node_bundles(cfg: ExperimentConfig, geo: ModeGeometry, deltas):
    """One stratified bundle per bandwidth node, grids rotated per node."""
    for j, delta in enumerate(deltas):
        yield modesim.sample_geometric_mode(
            geo.crystal,
            geo.theta_int + float(delta),
            geo.rho,
            cfg.render.n_depth,
            cfg.render.n_azimuth,
            exit_index=geo.exit_index,
            _depth_frac=(j * _GOLDEN * _GOLDEN) % 1.0 if len(deltas) > 1 else 0.0,
            _phi_frac=(j * _GOLDEN) % 1.0 if len(deltas) > 1 else 0.0,
        )


def _geometric_extent_m(cfg: ExperimentConfig, geo: ModeGeometry, deltas) -> float:
    z = cfg.geometry.plane_z_mm * 1e-3
    L = geo.crystal.length_m
    ext = z * math.tan(geo.theta_ext) + L * max(math.tan(abs(geo.theta_int)),
                                                math.tan(geo.rho))
    reach = float(np.max(np.abs(deltas))) if len(deltas) > 1 else 0.0
    return ext + z * 1.7 * reach


def _lens_extent_m(cfg, geo, lens: LensSpec, plane_z_m, deltas) -> float:
    d1 = lens.distance_mm * 1e-3
    f = lens.focal_mm * 1e-3
    reach = float(np.max(np.abs(deltas))) if len(deltas) > 1 else 0.0
    t_max = math.tan(math.asin(min(geo.exit_index * math.sin(abs(geo.theta_int) + reach), 1.0)))
    L = geo.crystal.length_m
    near = L * max(math.tan(abs(geo.theta_int)), math.tan(geo.rho)) + d1 * math.tan(geo.theta_ext)
    d2 = plane_z_m - d1
    ext = 1.2 * f * t_max + abs(1.0 - d2 / f) * near + 2e-4
    ext += max(abs(lens.offset_x_um), abs(lens.offset_y_um)) * 1e-6 * abs(d2 / f)
    return ext


def _image_spec(cfg: ExperimentConfig, extent_m: float, margin: float = 2.2) -> ImageSpec:
    npx = cfg.render.image_px
    if cfg.render.pitch_um > 0:
        pitch = cfg.render.pitch_um
    else:
        pitch = margin * extent_m * 1e6 / npx
    return ImageSpec(width=npx, height=npx, pitch_um=pitch)


def render_experiment(cfg: ExperimentConfig) -> ModeImage:
    """Render the configured mode (inserting the configured lens, if any)."""
    cfg.validate()
    if cfg.lens is not None:
        return render_through_lens(cfg, cfg.lens, cfg.geometry.plane_z_mm * 1e-3)
    geo = mode_geometry(cfg)
    plane_z_m = cfg.geometry.plane_z_mm * 1e-3
    if cfg.render.mode == "wave":
        spec = _image_spec(cfg, _wave_extent_m(cfg, geo), margin=2.05)
        image = modesim.render_wave(
            geo.crystal, cfg.pump.waist_um, geo.wavelengths, geo.theta_pm,
            plane_z_m, spec,
            n_k=cfg.render.wave_k_grid,
            idler_sum=cfg.render.wave_idler_sum,
            n_k_idler=cfg.render.wave_idler_grid,
            rho=geo.rho,
        )
    else:
        deltas, weights = _bandwidth(cfg, geo)
        spec = _image_spec(cfg, _geometric_extent_m(cfg, geo, deltas))
        image = modesim.render_samples_weighted(
            _node_bundles(cfg, geo, deltas), weights, plane_z_m, spec,
        )
        image.metadata["render"] = "geometric"
        if cfg.render.phase_matching_bandwidth:
            image.metadata["bandwidth_nodes"] = len(deltas)
    if cfg.render.pump_waist_blur:
        image = modesim.gaussian_blur(image, cfg.pump.waist_um)
    image.metadata.update(_provenance(cfg, geo))
    return image


def render_through_lens(
    cfg: ExperimentConfig,
    lens: LensSpec,
    plane_z_m: float,
    image_spec: ImageSpec | None = None,
) -> ModeImage:
    """Render the geometric mode through a thin lens at its configured distance.

    Pass an explicit ``image_spec`` to hold the frame fixed across renders
    (required when comparing different lens offsets).
    """
    cfg.validate()
    geo = mode_geometry(cfg)
    if cfg.render.mode != "geometric":
        raise ConfigError("lens correction operates on the geometric render")
    d1 = lens.distance_mm * 1e-3
    d2 = plane_z_m - d1
    if d2 < 0:
        raise ConfigError("rendering plane lies before the lens")
    deltas, weights = _bandwidth(cfg, geo)
    spec = image_spec or _image_spec(cfg, _lens_extent_m(cfg, geo, lens, plane_z_m, deltas))

    def through(bundle):
        at_lens = propagate(bundle, d1)
        bent = apply_lens(at_lens, lens)
        return bent.positions_at(d2)

    image = modesim.render_samples_weighted(
        _node_bundles(cfg, geo, deltas), weights, plane_z_m, spec, transform=through,
    )
    if cfg.render.pump_waist_blur:
        image = modesim.gaussian_blur(image, cfg.pump.waist_um)
    image.metadata["render"] = "geometric+lens"
    image.metadata.update(_provenance(cfg, geo))
    image.metadata.update({
        "lens_focal_mm": lens.focal_mm,
        "lens_distance_mm": lens.distance_mm,
        "lens_offset_x_um": lens.offset_x_um,
        "lens_offset_y_um": lens.offset_y_um,
    })
    return image


def _wave_extent_m(cfg: ExperimentConfig, geo: ModeGeometry) -> float:
    z = cfg.geometry.plane_z_mm * 1e-3
    # the wave grid spans 3x the ring angle; size the frame to match
    sin_ext = min(geo.exit_index * math.sin(abs(geo.theta_int)) * 3.0, 0.99)
    return max(z * math.tan(math.asin(sin_ext)), 1e-4)


def _provenance(cfg: ExperimentConfig, geo: ModeGeometry) -> dict:
    return {
        "crystal": geo.crystal.name,
        "length_mm": geo.crystal.length_mm,
        "pump_nm": geo.wavelengths.pump_nm,
        "signal_nm": geo.wavelengths.signal_nm,
        "idler_nm": round(geo.wavelengths.idler_nm, 6),
        "emission_angle_deg": cfg.geometry.emission_angle_deg,
        "theta_pm_deg": round(math.degrees(geo.theta_pm), 6),
        "walkoff_deg": round(math.degrees(geo.rho), 6),
        "pump_waist_um": cfg.pump.waist_um,
    }
