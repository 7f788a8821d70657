"""Dispersion and birefringence of negative uniaxial crystals.

Refractive indices come from a configurable Sellmeier form
``n^2 = A + B/(lam^2 - C) - D*lam^2`` (lam in micrometers); coefficient sets
are loaded from plain-text data files so the physics data stays out of the
code. All angles here are internal to the crystal; refraction at the exit
face is applied downstream when mapping rays to a camera plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import PhaseMatchError, ValidationError, WavelengthRangeError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SellmeierCoefficients:
    """One principal index: n^2 = A + B/(lam^2 - C) - D*lam^2, lam in um."""

    a: float
    b: float
    c: float
    d: float
    valid_min_nm: float
    valid_max_nm: float

    def index(self, wavelength_nm: float) -> float:
        if not (self.valid_min_nm <= wavelength_nm <= self.valid_max_nm):
            raise WavelengthRangeError(
                f"wavelength {wavelength_nm:g} nm outside validity range "
                f"[{self.valid_min_nm:g}, {self.valid_max_nm:g}] nm"
            )
        lam2 = (wavelength_nm * 1e-3) ** 2
        n2 = self.a + self.b / (lam2 - self.c) - self.d * lam2
        if n2 <= 1.0:
            raise WavelengthRangeError(
                f"Sellmeier evaluation gives n^2 = {n2:g} <= 1 at {wavelength_nm:g} nm"
            )
        return math.sqrt(n2)


@dataclass(frozen=True)
class CrystalSpec:
    """Uniaxial crystal geometry and dispersion."""

    name: str
    length_mm: float
    cut_angle_deg: float
    sellmeier_o: SellmeierCoefficients
    sellmeier_e: SellmeierCoefficients

    def __post_init__(self):
        if self.length_mm <= 0:
            raise ValidationError(f"crystal length must be positive, got {self.length_mm!r}")
        if not 0.0 <= self.cut_angle_deg <= 90.0:
            raise ValidationError(
                f"cut angle must lie in [0, 90] degrees, got {self.cut_angle_deg!r}"
            )

    @property
    def length_m(self) -> float:
        return self.length_mm * 1e-3

    @property
    def cut_angle_rad(self) -> float:
        return math.radians(self.cut_angle_deg)


@dataclass(frozen=True)
class Wavelengths:
    """Vacuum wavelengths of the pump, signal and idler, in nm."""

    pump_nm: float
    signal_nm: float
    idler_nm: float

    def __post_init__(self):
        for name in ("pump_nm", "signal_nm", "idler_nm"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        lhs = 1.0 / self.pump_nm
        rhs = 1.0 / self.signal_nm + 1.0 / self.idler_nm
        if abs(lhs - rhs) > 1e-9 * lhs:
            raise ValidationError(
                "energy conservation violated: 1/pump != 1/signal + 1/idler "
                f"({lhs:.12g} vs {rhs:.12g} 1/nm)"
            )

    @classmethod
    def from_pump_signal(cls, pump_nm: float, signal_nm: float) -> "Wavelengths":
        """Derive the idler from energy conservation."""
        if signal_nm <= pump_nm:
            raise ValidationError("signal wavelength must exceed the pump wavelength")
        idler_nm = 1.0 / (1.0 / pump_nm - 1.0 / signal_nm)
        return cls(pump_nm, signal_nm, idler_nm)

    @classmethod
    def degenerate(cls, pump_nm: float) -> "Wavelengths":
        return cls(pump_nm, 2.0 * pump_nm, 2.0 * pump_nm)


def index_ordinary(spec: CrystalSpec, wavelength_nm: float) -> float:
    """Ordinary principal index n_o(lam)."""
    return spec.sellmeier_o.index(wavelength_nm)


def index_extraordinary(spec: CrystalSpec, wavelength_nm: float, theta: float) -> float:
    """Effective extraordinary index for propagation at theta from the optic axis.

    Index ellipsoid: 1/n(theta)^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValidationError(f"theta must lie in [0, pi], got {theta!r}")
    n_o = spec.sellmeier_o.index(wavelength_nm)
    n_e = spec.sellmeier_e.index(wavelength_nm)
    ct, st = math.cos(theta), math.sin(theta)
    return 1.0 / math.sqrt(ct * ct / (n_o * n_o) + st * st / (n_e * n_e))


def walkoff_angle(spec: CrystalSpec, wavelength_nm: float, theta: float) -> float:
    """Walk-off angle rho >= 0 between Poynting vector and wave vector.

    tan(rho) = (n(theta)^2 / 2) |1/n_e^2 - 1/n_o^2| sin(2 theta). The angle is
    reported positive; the emission model applies it along -y.
    """
    n_o = spec.sellmeier_o.index(wavelength_nm)
    n_e = spec.sellmeier_e.index(wavelength_nm)
    n_th = index_extraordinary(spec, wavelength_nm, theta)
    tan_rho = (n_th * n_th / 2.0) * abs(1.0 / (n_e * n_e) - 1.0 / (n_o * n_o)) * abs(
        math.sin(2.0 * theta)
    )
    return math.atan(tan_rho)


def wavenumber(
    spec: CrystalSpec,
    wavelength_nm: float,
    polarization: str = "ordinary",
    theta: float | None = None,
) -> float:
    """In-medium wavenumber k = 2 pi n / lam_vacuum, in rad/m."""
    if polarization == "ordinary":
        n = index_ordinary(spec, wavelength_nm)
    elif polarization == "extraordinary":
        if theta is None:
            raise ValidationError("extraordinary wavenumber requires theta")
        n = index_extraordinary(spec, wavelength_nm, theta)
    else:
        raise ValidationError(f"unknown polarization {polarization!r}")
    return TWO_PI * n / (wavelength_nm * 1e-9)


def solve_phasematch_angle(
    spec: CrystalSpec,
    wavelengths: Wavelengths,
    emission_angle: float = 0.0,
    tol_rad_per_m: float = 1.0,
) -> float:
    """Pump angle to the optic axis that nulls the longitudinal mismatch.

    For the symmetric type-I geometry (signal and idler both ordinary, both at
    the internal angle ``emission_angle``) this solves

        k_p^e(theta_pm) - k_s cos(theta) - k_i cos(theta) = 0

    by bisection until |dk_z| < ``tol_rad_per_m``.
    """
    if emission_angle < 0:
        raise ValidationError("emission_angle must be >= 0 (internal angle)")
    k_s = wavenumber(spec, wavelengths.signal_nm)
    k_i = wavenumber(spec, wavelengths.idler_nm)
    target = (k_s + k_i) * math.cos(emission_angle)

    def mismatch(theta_pm: float) -> float:
        return wavenumber(spec, wavelengths.pump_nm, "extraordinary", theta_pm) - target

    lo, hi = 1e-9, math.pi / 2 - 1e-9
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo * f_hi > 0:
        raise PhaseMatchError(
            f"no phase-matching angle in (0, 90) deg for {wavelengths} "
            f"at emission angle {math.degrees(emission_angle):.3f} deg"
        )
    # bisection: k_p^e(theta) is strictly monotone for a negative crystal
    while True:
        mid = 0.5 * (lo + hi)
        f_mid = mismatch(mid)
        if abs(f_mid) < tol_rad_per_m:
            return mid
        if (f_lo > 0) == (f_mid > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            return mid


def _parse_crystal_file(text: str, source: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        entries[key] = value
    return entries


def load_coefficient_file(
    path: str | Path,
) -> tuple[str, SellmeierCoefficients, SellmeierCoefficients, float | None]:
    """Read a crystal data file; returns (name, ordinary, extraordinary, stock cut)."""
    path = Path(path)
    entries = _parse_crystal_file(path.read_text(), str(path))
    try:
        name = entries["name"]
        lo_nm, hi_nm = (float(v) for v in entries["valid_nm"].split())
        sets = []
        for pol in ("o", "e"):
            sets.append(
                SellmeierCoefficients(
                    a=float(entries[f"{pol}.A"]),
                    b=float(entries[f"{pol}.B"]),
                    c=float(entries[f"{pol}.C"]),
                    d=float(entries[f"{pol}.D"]),
                    valid_min_nm=lo_nm,
                    valid_max_nm=hi_nm,
                )
            )
    except KeyError as exc:
        raise ValidationError(f"{path}: missing entry {exc}") from exc
    cut = float(entries["cut_deg"]) if "cut_deg" in entries else None
    return name, sets[0], sets[1], cut


def load_crystal(
    name: str,
    length_mm: float,
    cut_angle_deg: float | None = None,
    data_dir: str | Path | None = None,
) -> CrystalSpec:
    """Build a CrystalSpec from a named bundled (or external) data file."""
    filename = f"{name.lower()}.crystal"
    if data_dir is not None:
        path = Path(data_dir) / filename
        if not path.exists():
            raise ValidationError(f"unknown crystal {name!r}: no file {path}")
        label, sell_o, sell_e, stock_cut = load_coefficient_file(path)
    else:
        ref = resources.files("spdcmodes.data").joinpath(filename)
        if not ref.is_file():
            raise ValidationError(f"unknown crystal {name!r}: no bundled data file {filename}")
        with resources.as_file(ref) as path:
            label, sell_o, sell_e, stock_cut = load_coefficient_file(path)
    if cut_angle_deg is None:
        if stock_cut is None:
            raise ValidationError(
                f"crystal file for {name!r} declares no stock cut; pass cut_angle_deg"
            )
        cut_angle_deg = stock_cut
    return CrystalSpec(
        name=label,
        length_mm=length_mm,
        cut_angle_deg=cut_angle_deg,
        sellmeier_o=sell_o,
        sellmeier_e=sell_e,
    )
