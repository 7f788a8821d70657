"""Asymmetry quantification of annular mode images.

The asymmetry factor is AF = 1 - a/b, where a and b are the 1/e^2 annulus
thicknesses along the x and y axes through the ring center. Each axis crosses
the annulus in two lobes; a lobe's width is measured at 1/e^2 of its own peak
(per-lobe normalization, since walk-off also skews lobe heights) with linear
interpolation between pixels, and the two lobes of an axis are averaged.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import AnalysisError
from .modesim import ModeImage

INV_E2 = math.exp(-2.0)


@dataclass(frozen=True)
class AsymmetryReport:
    center_x_um: float
    center_y_um: float
    width_x_a_um: float
    width_y_b_um: float
    af: float


def find_ring_center(image: ModeImage) -> tuple[float, float]:
    """Ring center in physical micrometers.

    Intensity-weighted centroid, refined by one pass of an algebraic
    least-squares circle fit over the pixels above half maximum.
    """
    arr = image.intensities
    total = arr.sum()
    if total <= 0:
        raise AnalysisError("degenerate image: all pixels are zero")
    xs = image.x_coords_um()
    ys = image.y_coords_um()
    X, Y = np.meshgrid(xs, ys)
    w = arr / total
    cx = float((X * w).sum())
    cy = float((Y * w).sum())

    mask = arr > 0.5 * arr.max()
    if mask.sum() < 6:
        raise AnalysisError(
            f"degenerate image: only {int(mask.sum())} pixels above half maximum"
        )
    # Kasa fit: minimize sum w (x^2 + y^2 + D x + E y + F)^2
    px = X[mask] - cx
    py = Y[mask] - cy
    pw = np.sqrt(arr[mask])
    design = np.stack([px, py, np.ones_like(px)], axis=1) * pw[:, None]
    rhs = -(px**2 + py**2) * pw
    (d_coef, e_coef, _), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return cx - d_coef / 2.0, cy - e_coef / 2.0


def _profile_through(image: ModeImage, center_um, axis: str) -> tuple[np.ndarray, np.ndarray]:
    """1-D intensity profile along an axis line through the center (bilinear)."""
    arr = image.intensities
    cx, cy = center_um
    if axis == "x":
        coords = image.x_coords_um()
        line_pos = (cy - image.origin_y_um) / image.pitch_um
        j = np.clip(line_pos, 0, arr.shape[0] - 1)
        j0 = int(np.floor(j))
        j1 = min(j0 + 1, arr.shape[0] - 1)
        f = j - j0
        profile = (1 - f) * arr[j0, :] + f * arr[j1, :]
    elif axis == "y":
        coords = image.y_coords_um()
        line_pos = (cx - image.origin_x_um) / image.pitch_um
        i = np.clip(line_pos, 0, arr.shape[1] - 1)
        i0 = int(np.floor(i))
        i1 = min(i0 + 1, arr.shape[1] - 1)
        f = i - i0
        profile = (1 - f) * arr[:, i0] + f * arr[:, i1]
    else:
        raise AnalysisError(f"axis must be 'x' or 'y', got {axis!r}")
    return coords, profile


def _lobe_width(profile, coords, center_coord, side) -> float | None:
    """1/e^2-of-lobe-peak full width of the lobe on one side of the center.

    Crossings are interpolated linearly. If the level is never reached on the
    inner flank (annulus merging into a filled core) the lobe is clipped at
    the interior minimum. Returns None when no lobe exists on that side.
    """
    sel = coords >= center_coord if side > 0 else coords <= center_coord
    seg = profile[sel]
    cseg = coords[sel]
    if side < 0:
        seg = seg[::-1]
        cseg = cseg[::-1]
    if seg.size < 3 or seg.max() <= 0:
        return None
    pk = int(np.argmax(seg))
    if pk == 0:
        return None  # peaks at the center: no separated lobe
    level = seg[pk] * INV_E2
    outer = None
    for i in range(pk, seg.size - 1):
        if seg[i] >= level > seg[i + 1]:
            t = (seg[i] - level) / (seg[i] - seg[i + 1])
            outer = cseg[i] + t * (cseg[i + 1] - cseg[i])
            break
    if outer is None:
        return None  # lobe runs off the frame
    inner = None
    for i in range(pk, 0, -1):
        if seg[i] >= level > seg[i - 1]:
            t = (seg[i] - level) / (seg[i] - seg[i - 1])
            inner = cseg[i] + t * (cseg[i - 1] - cseg[i])
            break
    if inner is None:
        inner = cseg[int(np.argmin(seg[: pk + 1]))]
    return abs(outer - inner)


def axis_thickness(image: ModeImage, center_um, axis: str) -> float:
    """Mean 1/e^2 thickness of the two annulus lobes along one axis, um."""
    coords, profile = _profile_through(image, center_um, axis)
    c = center_um[0] if axis == "x" else center_um[1]
    widths = [_lobe_width(profile, coords, c, +1), _lobe_width(profile, coords, c, -1)]
    found = [w for w in widths if w is not None]
    if len(found) < 2:
        raise AnalysisError(
            f"fewer than two annulus lobes detected along the {axis} axis"
        )
    return 0.5 * (found[0] + found[1])


def asymmetry_factor(image: ModeImage) -> AsymmetryReport:
    """Ring center, axis thicknesses and AF = 1 - a/b for one image."""
    center = find_ring_center(image)
    a = axis_thickness(image, center, "x")
    b = axis_thickness(image, center, "y")
    return AsymmetryReport(
        center_x_um=center[0],
        center_y_um=center[1],
        width_x_a_um=a,
        width_y_b_um=b,
        af=1.0 - a / b,
    )


def ring_peak_radius(image: ModeImage, center_um=None, n_azimuth: int = 360) -> float:
    """Azimuth-averaged radius of the annulus intensity peak, um."""
    if center_um is None:
        center_um = find_ring_center(image)
    radii = _radial_peak_positions(image, center_um, n_azimuth)
    good = radii[np.isfinite(radii)]
    if good.size == 0:
        raise AnalysisError("no ring detected in any azimuthal bin")
    return float(good.mean())


def _radial_samples(image: ModeImage, center_um, azimuth, r_um):
    """Bilinear image samples along one ray from the center."""
    arr = image.intensities
    x = (center_um[0] + r_um * math.sin(azimuth) - image.origin_x_um) / image.pitch_um
    y = (center_um[1] + r_um * math.cos(azimuth) - image.origin_y_um) / image.pitch_um
    ok = (x >= 0) & (x <= arr.shape[1] - 1) & (y >= 0) & (y <= arr.shape[0] - 1)
    x = np.clip(x, 0, arr.shape[1] - 1)
    y = np.clip(y, 0, arr.shape[0] - 1)
    i0 = np.floor(y).astype(int)
    j0 = np.floor(x).astype(int)
    i1 = np.minimum(i0 + 1, arr.shape[0] - 1)
    j1 = np.minimum(j0 + 1, arr.shape[1] - 1)
    fy = y - i0
    fx = x - j0
    vals = ((1 - fy) * (1 - fx) * arr[i0, j0] + (1 - fy) * fx * arr[i0, j1]
            + fy * (1 - fx) * arr[i1, j0] + fy * fx * arr[i1, j1])
    return np.where(ok, vals, 0.0)


def _radial_peak_positions(image: ModeImage, center_um, n_azimuth):
    half_w = 0.5 * image.width * image.pitch_um
    half_h = 0.5 * image.height * image.pitch_um
    r = np.arange(0.0, math.hypot(half_w, half_h), 0.5 * image.pitch_um)
    peaks = np.full(n_azimuth, np.nan)
    for k in range(n_azimuth):
        az = 2.0 * math.pi * k / n_azimuth
        prof = _radial_samples(image, center_um, az, r)
        if prof.max() <= 0:
            continue
        peaks[k] = r[int(np.argmax(prof))]
    return peaks


def radial_width_profile(image: ModeImage, n_azimuth: int = 360) -> np.ndarray:
    """Per-azimuth 1/e^2 radial widths of the annulus.

    Returns an (n_azimuth, 2) array of (azimuth_deg, width_um). Azimuth runs
    from +y toward +x.
    """
    center = find_ring_center(image)
    half_w = 0.5 * image.width * image.pitch_um
    half_h = 0.5 * image.height * image.pitch_um
    r = np.arange(0.0, math.hypot(half_w, half_h), 0.5 * image.pitch_um)
    out = np.empty((n_azimuth, 2))
    n_found = 0
    for k in range(n_azimuth):
        az = 2.0 * math.pi * k / n_azimuth
        prof = _radial_samples(image, center, az, r)
        width = _lobe_width(prof, r, 0.0, +1)
        out[k] = (math.degrees(az), width if width is not None else np.nan)
        if width is not None:
            n_found += 1
    if n_found < n_azimuth // 2:
        raise AnalysisError(
            f"no ring detected: radial lobe found in only {n_found}/{n_azimuth} bins"
        )
    return out


# ---------------------------------------------------------------------------
# parameter sweeps

SWEEP_PARAMETERS = ("crystal_length", "emission_angle", "pump_waist")


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    af: float
    width_x_a_um: float
    width_y_b_um: float
    center_x_um: float
    center_y_um: float


def sweep_af(parameter: str, values, fixed_config) -> list[SweepRow]:
    """Render and measure the mode for each parameter value.

    ``fixed_config`` is an ExperimentConfig; ``parameter`` selects which field
    each value overrides. Rows come back ordered by input value order.
    """
    from .pipeline import render_experiment

    if parameter not in SWEEP_PARAMETERS:
        raise AnalysisError(
            f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}"
        )
    values = list(values)
    if len(values) < 1:
        raise AnalysisError("sweep needs at least one value")
    rows = []
    for value in values:
        cfg = fixed_config.with_override(parameter, float(value))
        try:
            image = render_experiment(cfg)
            report = asymmetry_factor(image)
        except Exception as exc:
            raise AnalysisError(
                f"sweep failed at {parameter} = {value!r}: {exc}"
            ) from exc
        rows.append(
            SweepRow(
                parameter=parameter,
                value=float(value),
                af=report.af,
                width_x_a_um=report.width_x_a_um,
                width_y_b_um=report.width_y_b_um,
                center_x_um=report.center_x_um,
                center_y_um=report.center_y_um,
            )
        )
    return rows


def write_sweep_csv(rows, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["parameter", "value", "af", "width_x_a_um", "width_y_b_um",
             "center_x_um", "center_y_um"]
        )
        for row in rows:
            writer.writerow(
                [row.parameter, f"{row.value:.9g}", f"{row.af:.9g}",
                 f"{row.width_x_a_um:.9g}", f"{row.width_y_b_um:.9g}",
                 f"{row.center_x_um:.9g}", f"{row.center_y_um:.9g}"]
            )
    return path


# ---------------------------------------------------------------------------
# analytic widths straight from the coordinate model

def point_set_axis_widths(
    length_m: float,
    theta_int: float,
    theta_ext: float,
    rho: float,
    plane_z_m: float,
    n_depth: int = 8192,
) -> tuple[float, float]:
    """Axis thicknesses (um) computed directly from the emission point set.

    No rendering: the exact axis crossings of the propagated circle family
    are evaluated on a fine depth grid. The x-axis line runs through the mid
    walk-off height -L tan(rho)/2; y widths average the spans of the top and
    bottom crossing branches.
    """
    a = np.linspace(0.0, length_m, n_depth)
    ring = plane_z_m * math.tan(theta_ext)
    radius = ring + (length_m - a) * math.tan(theta_int)
    sink = a * math.tan(rho)
    top = radius - sink
    bottom = -radius - sink
    span_top = top.max() - top.min()
    span_bot = bottom.max() - bottom.min()
    width_y = 0.5 * (span_top + span_bot)

    y_line = -0.5 * length_m * math.tan(rho)
    d = y_line + sink
    cross = radius**2 - d**2
    valid = cross > 0
    if not np.any(valid):
        raise AnalysisError("point-set x width undefined: no crossings")
    x = np.sqrt(cross[valid])
    width_x = x.max() - x.min()
    return width_x * 1e6, width_y * 1e6
