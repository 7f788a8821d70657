"""Synthesis of two-dimensional SPDC mode images.

Two routes are provided. The geometric route draws a deterministic stratified
grid of emission samples (birth depth x azimuth), places each at its exit-face
coordinate, refracts it, and propagates it ballistically to the camera plane.
The wave route evaluates the squared phase-matching amplitude over a grid of
signal transverse wave vectors and maps angles to camera positions.

The geometric route can additionally be smeared over the phase-matching
angular bandwidth (a deterministic quadrature over emission angles weighted
by the sinc^2 profile), which reproduces the thick, nearly symmetric rings
seen close to collinear alignment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crystal import CrystalSpec, Wavelengths, index_ordinary, wavenumber
from .errors import RenderError, ValidationError

_GOLDEN = 0.6180339887498949


# ---------------------------------------------------------------------------
# samples

@dataclass(frozen=True)
class RaySample:
    """One geometric emission sample."""

    a: float           # birth depth from the entrance face, m
    phi: float         # azimuth, rad, in [0, 2 pi)
    theta: float       # internal emission polar angle, rad
    exit_x: float      # exit-face position, m
    exit_y: float
    dir_theta: float   # polar angle after exit refraction, rad
    dir_phi: float     # azimuth of propagation (unchanged by refraction)


class RayBundle:
    """Array-backed sequence of RaySample."""

    __slots__ = ("a", "phi", "theta", "exit_x", "exit_y", "dir_theta", "dir_phi")

    def __init__(self, a, phi, theta, exit_x, exit_y, dir_theta, dir_phi):
        self.a = np.asarray(a, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.exit_x = np.asarray(exit_x, dtype=float)
        self.exit_y = np.asarray(exit_y, dtype=float)
        self.dir_theta = np.asarray(dir_theta, dtype=float)
        self.dir_phi = np.asarray(dir_phi, dtype=float)

    def __len__(self):
        return self.a.size

    def __getitem__(self, i) -> RaySample:
        return RaySample(
            a=float(self.a[i]), phi=float(self.phi[i]), theta=float(self.theta[i]),
            exit_x=float(self.exit_x[i]), exit_y=float(self.exit_y[i]),
            dir_theta=float(self.dir_theta[i]), dir_phi=float(self.dir_phi[i]),
        )

    def positions_at(self, plane_z_m: float):
        """Ballistic transverse positions a distance plane_z past the exit face."""
        r = plane_z_m * np.tan(self.dir_theta)
        return self.exit_x + r * np.sin(self.dir_phi), self.exit_y + r * np.cos(self.dir_phi)


def geometric_exit_point(length_m, a_m, theta, phi, rho):
    """Exit-face coordinates of an emission born at depth ``a_m``.

    x = sin(phi) (L - a) tan(theta)
    y = cos(phi) (L - a) tan(theta) - a tan(rho)

    The walk-off displacement acts along -y. Accepts scalars or arrays.
    """
    a = np.asarray(a_m, dtype=float)
    if np.any(a < 0) or np.any(a > length_m):
        raise ValidationError("birth depth must lie in [0, L]")
    reach = (length_m - a) * np.tan(theta)
    x = np.sin(phi) * reach
    y = np.cos(phi) * reach - a * math.tan(rho)
    return x, y


def _stratified_grid(length_m, n_depth, n_azimuth, depth_frac=0.0, phi_frac=0.0):
    """Cell-center depth/azimuth grid, optionally rotated by sub-cell fractions."""
    a = (np.arange(n_depth) + 0.5 + depth_frac) / n_depth * length_m
    a = np.minimum(a, length_m * (1.0 - 1e-12))
    phi = (np.arange(n_azimuth) + phi_frac) / n_azimuth * (2.0 * math.pi)
    A, PHI = np.meshgrid(a, phi, indexing="ij")
    return A.ravel(), PHI.ravel()


def sample_geometric_mode(
    spec: CrystalSpec,
    theta_emission: float,
    rho: float,
    n_depth: int,
    n_azimuth: int,
    exit_index: float = 1.0,
    _depth_frac: float = 0.0,
    _phi_frac: float = 0.0,
) -> RayBundle:
    """Stratified geometric samples of one emission cone.

    ``theta_emission`` is the internal polar angle; ``exit_index`` is the
    refractive index seen by the emission (Snell at the exit face,
    sin(theta_out) = n sin(theta_in)). The grid is deterministic: depth cell
    centers x uniform azimuths.
    """
    if n_depth < 2 or n_azimuth < 2:
        raise ValidationError("need at least 2 depth and 2 azimuth samples")
    L = spec.length_m
    a, phi = _stratified_grid(L, n_depth, n_azimuth, _depth_frac, _phi_frac)
    x, y = geometric_exit_point(L, a, theta_emission, phi, rho)
    sin_out = np.clip(exit_index * math.sin(theta_emission), -1.0, 1.0)
    theta_out = math.asin(sin_out)
    return RayBundle(
        a=a, phi=phi,
        theta=np.full_like(a, theta_emission),
        exit_x=x, exit_y=y,
        dir_theta=np.full_like(a, theta_out),
        dir_phi=phi,
    )


# ---------------------------------------------------------------------------
# images

@dataclass
class ImageSpec:
    """Pixel grid for rendering: square pixels, physical pitch, centered origin."""

    width: int = 512
    height: int = 512
    pitch_um: float = 8.0

    def __post_init__(self):
        if self.width < 16 or self.height < 16:
            raise ValidationError("image must be at least 16x16 pixels")
        if self.pitch_um <= 0:
            raise ValidationError("pixel pitch must be positive")

    @property
    def origin_x_um(self) -> float:
        return -0.5 * (self.width - 1) * self.pitch_um

    @property
    def origin_y_um(self) -> float:
        return -0.5 * (self.height - 1) * self.pitch_um


@dataclass
class ModeImage:
    """2-D intensity grid with physical pixel geometry.

    ``intensities[iy, ix]`` sits at physical position
    (origin_x_um + ix * pitch_um, origin_y_um + iy * pitch_um), micrometers.
    """

    intensities: np.ndarray
    pitch_um: float
    origin_x_um: float
    origin_y_um: float
    plane_z_m: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.intensities, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 16 or arr.shape[1] < 16:
            raise ValidationError("intensity grid must be 2-D, at least 16x16")
        if self.pitch_um <= 0:
            raise ValidationError("pixel pitch must be positive")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValidationError("intensities must be finite and non-negative")
        self.intensities = arr

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @property
    def width(self) -> int:
        return self.intensities.shape[1]

    def x_coords_um(self):
        return self.origin_x_um + np.arange(self.width) * self.pitch_um

    def y_coords_um(self):
        return self.origin_y_um + np.arange(self.height) * self.pitch_um


def _splat_bilinear(acc, x_m, y_m, weights, spec: ImageSpec) -> int:
    """Deposit samples onto the pixel grid with bilinear weights.

    Returns the in-bounds sample count; each in-bounds sample deposits its
    full weight (the four bilinear fractions sum to one).
    """
    pitch_m = spec.pitch_um * 1e-6
    px = (x_m - spec.origin_x_um * 1e-6) / pitch_m
    py = (y_m - spec.origin_y_um * 1e-6) / pitch_m
    ix = np.floor(px).astype(np.int64)
    iy = np.floor(py).astype(np.int64)
    fx = px - ix
    fy = py - iy
    ok = (ix >= 0) & (ix < spec.width - 1) & (iy >= 0) & (iy < spec.height - 1)
    ix, iy, fx, fy = ix[ok], iy[ok], fx[ok], fy[ok]
    w = np.asarray(weights, dtype=float)[ok] if np.ndim(weights) else float(weights)
    np.add.at(acc, (iy, ix), w * (1 - fx) * (1 - fy))
    np.add.at(acc, (iy, ix + 1), w * fx * (1 - fy))
    np.add.at(acc, (iy + 1, ix), w * (1 - fx) * fy)
    np.add.at(acc, (iy + 1, ix + 1), w * fx * fy)
    return int(ok.sum())


def render_geometric(
    samples: RayBundle,
    plane_z_m: float,
    image_spec: ImageSpec,
    oob_warn_fraction: float = 0.01,
) -> ModeImage:
    """Propagate samples to the plane and splat them onto a pixel grid.

    The result is normalized to unit peak. Fewer than 100 %% of samples
    landing in-frame is tolerated; above ``oob_warn_fraction`` a warning is
    recorded in the metadata. Zero in-bounds samples is an error.
    """
    x, y = samples.positions_at(plane_z_m)
    acc = np.zeros((image_spec.height, image_spec.width))
    n_in = _splat_bilinear(acc, x, y, 1.0, image_spec)
    if n_in == 0:
        raise RenderError("no samples landed inside the image frame")
    oob = 1.0 - n_in / len(samples)
    meta = {
        "samples": len(samples),
        "in_bounds": n_in,
        "oob_fraction": oob,
        "deposited_weight": float(acc.sum()),
    }
    if oob > oob_warn_fraction:
        meta["warning"] = f"{oob:.1%} of samples fell outside the image"
    peak = acc.max()
    return ModeImage(
        intensities=acc / peak,
        pitch_um=image_spec.pitch_um,
        origin_x_um=image_spec.origin_x_um,
        origin_y_um=image_spec.origin_y_um,
        plane_z_m=plane_z_m,
        metadata=meta,
    )


def render_samples_weighted(
    node_bundles,
    node_weights,
    plane_z_m: float,
    image_spec: ImageSpec,
    transform=None,
) -> ModeImage:
    """Accumulate several weighted bundles into one normalized image.

    ``transform``, when given, maps a bundle to transverse positions at the
    target plane (used for lens paths); otherwise ballistic propagation.
    """
    acc = np.zeros((image_spec.height, image_spec.width))
    n_in_total = 0
    n_total = 0
    for bundle, w in zip(node_bundles, node_weights):
        if transform is None:
            x, y = bundle.positions_at(plane_z_m)
        else:
            x, y = transform(bundle)
        n_in_total += _splat_bilinear(acc, x, y, w, image_spec)
        n_total += len(bundle)
    if n_in_total == 0:
        raise RenderError("no samples landed inside the image frame")
    meta = {
        "samples": n_total,
        "in_bounds": n_in_total,
        "oob_fraction": 1.0 - n_in_total / n_total,
        "deposited_weight": float(acc.sum()),
    }
    if meta["oob_fraction"] > 0.01:
        meta["warning"] = f"{meta['oob_fraction']:.1%} of samples fell outside the image"
    peak = acc.max()
    return ModeImage(
        intensities=acc / peak,
        pitch_um=image_spec.pitch_um,
        origin_x_um=image_spec.origin_x_um,
        origin_y_um=image_spec.origin_y_um,
        plane_z_m=plane_z_m,
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# phase-matching angular bandwidth

def stationary_mismatch(
    spec: CrystalSpec,
    wavelengths: Wavelengths,
    theta_pm: float,
    theta_s_int,
):
    """Longitudinal mismatch vs internal signal angle, idler transverse-matched.

    The idler direction is chosen so the pair's summed transverse momentum
    vanishes (k_i sin(theta_i) = k_s sin(theta_s)), the dominant pairing under
    a wide pump. Scalar or ndarray ``theta_s_int``.
    """
    k_p = wavenumber(spec, wavelengths.pump_nm, "extraordinary", theta_pm)
    k_s = wavenumber(spec, wavelengths.signal_nm)
    k_i = wavenumber(spec, wavelengths.idler_nm)
    th = np.asarray(theta_s_int, dtype=float)
    st = np.abs(np.sin(th))
    sin_i = np.clip(k_s * st / k_i, 0.0, 1.0)
    dkz = k_p - k_s * np.cos(th) - k_i * np.sqrt(1.0 - sin_i * sin_i)
    return float(dkz) if dkz.ndim == 0 else dkz


def bandwidth_nodes(
    spec: CrystalSpec,
    wavelengths: Wavelengths,
    theta_pm: float,
    theta_ring_int: float,
    n_nodes: int = 161,
    reach: float = 2.2,
):
    """Quadrature nodes over the sinc^2 angular profile around the ring angle.

    Returns (delta_theta_int, weights); weights sum to one. ``reach`` is the
    truncation in units of the first sinc null.
    """
    if n_nodes < 3:
        raise ValidationError("need at least 3 bandwidth nodes")
    L = spec.length_m
    target = 2.0 * reach * math.pi / L

    def edge(sign):
        lo, hi = 0.0, max(4.0 * abs(theta_ring_int), 1e-3)
        f = lambda d: abs(stationary_mismatch(spec, wavelengths, theta_pm,
                                              theta_ring_int + sign * d)) - target
        while f(hi) < 0:
            hi *= 1.5
            if hi > 1.0:
                break
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    deltas = np.linspace(-edge(-1.0), edge(+1.0), n_nodes)
    dk = stationary_mismatch(spec, wavelengths, theta_pm, theta_ring_int + deltas)
    x = 0.5 * L * dk
    from .phasematch import sinc

    w = sinc(x) ** 2
    w = w / w.sum()
    return deltas, w


# ---------------------------------------------------------------------------
# wave route

def render_wave(
    spec: CrystalSpec,
    pump_waist_um: float,
    wavelengths: Wavelengths,
    theta_pm: float,
    plane_z_m: float,
    image_spec: ImageSpec,
    n_k: int = 384,
    k_span_factor: float = 3.0,
    idler_sum: str = "stationary",
    n_k_idler: int = 32,
    rho: float | None = None,
    min_ring_px: int = 8,
) -> ModeImage:
    """Signal-intensity image from the squared phase-matching amplitude.

    For every signal transverse wave vector on an ``n_k`` x ``n_k`` grid the
    intensity is |Phi|^2, either with the transverse-matched idler
    ("stationary") or summed over an idler grid ("full"); positions follow
    from exit refraction and small-angle propagation x = z tan(theta_ext).
    """
    from . import phasematch as pm
    from .crystal import walkoff_angle

    if idler_sum not in ("stationary", "full"):
        raise ValidationError(f"idler_sum must be 'stationary' or 'full', got {idler_sum!r}")
    k_s = wavenumber(spec, wavelengths.signal_nm)
    k_i = wavenumber(spec, wavelengths.idler_nm)
    k_p = wavenumber(spec, wavelengths.pump_nm, "extraordinary", theta_pm)
    if rho is None:
        rho = walkoff_angle(spec, wavelengths.pump_nm, theta_pm)
    n_sig = index_ordinary(spec, wavelengths.signal_nm)
    L = spec.length_m

    # ring angle for grid sizing: where the collinear-direction mismatch nulls
    dk0 = stationary_mismatch(spec, wavelengths, theta_pm, 0.0)
    grid = np.linspace(0.0, math.pi / 16, 4096)
    dk_grid = stationary_mismatch(spec, wavelengths, theta_pm, grid)
    ring_idx = int(np.argmin(np.abs(dk_grid))) if dk0 > 0 else 0
    theta_ring = float(grid[ring_idx])
    k_ring = k_s * math.sin(theta_ring) if theta_ring > 0 else k_s * 0.01
    k_max = k_span_factor * k_ring

    kx = np.linspace(-k_max, k_max, n_k)
    KX, KY = np.meshgrid(kx, kx)
    k_perp = np.hypot(KX, KY)
    valid = k_perp < k_s
    sin_th_s = np.where(valid, k_perp / k_s, 0.0)
    th_s = np.arcsin(sin_th_s)
    phi = np.arctan2(KY, KX)

    if idler_sum == "stationary":
        sin_th_i = np.clip(k_s * sin_th_s / k_i, 0.0, 1.0)
        dkz = k_p - k_s * np.cos(th_s) - k_i * np.sqrt(1.0 - sin_th_i**2)
        # transverse-matched pair: summed transverse momentum, hence the
        # envelope argument and the walk-off term, are identically zero
        intensity = pm.sinc(0.5 * L * dkz) ** 2
    else:
        w_m = pump_waist_um * 1e-6
        tan_rho = math.tan(rho)
        k_env = 2.0 / w_m
        ki_ax = np.linspace(-3.0 * k_env, 3.0 * k_env, n_k_idler)
        intensity = np.zeros_like(k_perp)
        ks_z = np.sqrt(np.maximum(k_s**2 - k_perp**2, 0.0))
        for dqx in ki_ax:
            for dqy in ki_ax:
                # idler transverse k: opposite the signal, plus pump spread
                qx = -KX + dqx
                qy = -KY + dqy
                qi2 = qx * qx + qy * qy
                ok = qi2 < k_i * k_i
                ki_z = np.sqrt(np.maximum(k_i * k_i - qi2, 0.0))
                dkz = k_p - ks_z - ki_z
                sx = KX + qx
                sy = KY + qy
                dk_eff = dkz - (sx * sx + sy * sy) / (2.0 * k_p) + sy * tan_rho
                env = np.exp(-(sx * sx + sy * sy) * w_m * w_m / 4.0)
                intensity += np.where(ok, (env * pm.sinc(0.5 * L * dk_eff)) ** 2, 0.0)
    intensity = np.where(valid, intensity, 0.0)

    # map signal angles to camera positions (exit refraction, small angles)
    sin_ext = np.clip(n_sig * sin_th_s, 0.0, 1.0)
    r = plane_z_m * np.tan(np.arcsin(sin_ext))
    x = r * np.cos(phi)
    y = r * np.sin(phi)

    ring_width_px = (
        plane_z_m * n_sig * (8.8 / (L * max(k_s * math.sin(theta_ring), 1.0)))
        / (image_spec.pitch_um * 1e-6)
    )
    if theta_ring > 0 and ring_width_px < min_ring_px:
        raise RenderError(
            f"ring would be {ring_width_px:.1f} px wide (< {min_ring_px}); "
            "increase resolution or crystal length"
        )

    acc = np.zeros((image_spec.height, image_spec.width))
    n_in = _splat_bilinear(acc, x.ravel(), y.ravel(), intensity.ravel(), image_spec)
    if n_in == 0 or acc.max() <= 0:
        raise RenderError("wave render produced an empty image")
    return ModeImage(
        intensities=acc / acc.max(),
        pitch_um=image_spec.pitch_um,
        origin_x_um=image_spec.origin_x_um,
        origin_y_um=image_spec.origin_y_um,
        plane_z_m=plane_z_m,
        metadata={
            "render": "wave",
            "idler_sum": idler_sum,
            "theta_ring_int_rad": theta_ring,
            "in_bounds": n_in,
        },
    )


# ---------------------------------------------------------------------------
# post-processing

def gaussian_blur(image: ModeImage, waist_um: float) -> ModeImage:
    """Convolve with a Gaussian whose 1/e^2 intensity waist is ``waist_um``."""
    if waist_um <= 0:
        raise ValidationError("blur waist must be positive")
    sigma_px = 0.5 * waist_um / image.pitch_um
    half = int(math.ceil(4.0 * sigma_px))
    if half < 1:
        return image
    t = np.arange(-half, half + 1)
    kernel = np.exp(-(t * t) / (2.0 * sigma_px * sigma_px))
    kernel /= kernel.sum()
    arr = image.intensities
    out = np.empty_like(arr)
    for i in range(arr.shape[0]):
        out[i, :] = np.convolve(arr[i, :], kernel, mode="same")
    for j in range(arr.shape[1]):
        out[:, j] = np.convolve(out[:, j], kernel, mode="same")
    peak = out.max()
    meta = dict(image.metadata)
    meta["pump_blur_waist_um"] = waist_um
    return ModeImage(
        intensities=out / peak if peak > 0 else out,
        pitch_um=image.pitch_um,
        origin_x_um=image.origin_x_um,
        origin_y_um=image.origin_y_um,
        plane_z_m=image.plane_z_m,
        metadata=meta,
    )
