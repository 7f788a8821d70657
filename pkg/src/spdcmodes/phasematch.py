"""Phase-mismatch decomposition and the sinc phase-matching amplitude.

The longitudinal/transverse mismatch components are written for general
signal/idler azimuths so a full annulus can be evaluated; the in-plane case
(phi_s = 0, phi_i = pi) reduces to the usual two-dimensional expressions.
Walk-off of the extraordinary pump enters as an extra ``dky * tan(rho)`` term
in the effective longitudinal mismatch, which is what breaks the up/down
symmetry of the emission.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class TransverseK:
    """Transverse wave-vector components, rad/m."""

    kx: float
    ky: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.kx, self.ky)


@dataclass(frozen=True)
class MismatchComponents:
    """Cartesian phase-mismatch components, rad/m."""

    dkz: float
    dkx: float
    dky: float


def mismatch_components(kp, ks, ki, theta_s, theta_i, phi_s=0.0, phi_i=math.pi):
    """Decompose the three-wave mismatch for given emission directions.

    dkz = kp - ks cos(theta_s) - ki cos(theta_i)
    dkx = ks sin(theta_s) cos(phi_s) + ki sin(theta_i) cos(phi_i)
    dky = ks sin(theta_s) sin(phi_s) + ki sin(theta_i) sin(phi_i)
    """
    if kp <= 0 or ks <= 0 or ki <= 0:
        raise ValidationError("wavenumbers must be positive")
    dkz = kp - ks * math.cos(theta_s) - ki * math.cos(theta_i)
    dkx = ks * math.sin(theta_s) * math.cos(phi_s) + ki * math.sin(theta_i) * math.cos(phi_i)
    dky = ks * math.sin(theta_s) * math.sin(phi_s) + ki * math.sin(theta_i) * math.sin(phi_i)
    return MismatchComponents(dkz=dkz, dkx=dkx, dky=dky)


def mismatch_with_walkoff(dk: MismatchComponents, kp, ks_perp: TransverseK,
                          ki_perp: TransverseK, rho: float):
    """Effective longitudinal mismatch including pump spread and walk-off.

    dk_eff = dkz - |k_perp_s + k_perp_i|^2 / (2 kp) + dky tan(rho)
    """
    if kp <= 0:
        raise ValidationError("kp must be positive")
    sx = ks_perp.kx + ki_perp.kx
    sy = ks_perp.ky + ki_perp.ky
    return dk.dkz - (sx * sx + sy * sy) / (2.0 * kp) + dk.dky * math.tan(rho)


def pump_envelope(ksum: TransverseK, waist_um: float):
    """Gaussian pump amplitude vs summed transverse wave vector.

    E = exp(-|k_s + k_i|^2 w_p^2 / 4), unity at zero argument; w_p is the
    1/e^2 intensity waist.
    """
    if waist_um <= 0:
        raise ValidationError(f"pump waist must be positive, got {waist_um!r}")
    w = waist_um * 1e-6
    s2 = ksum.kx * ksum.kx + ksum.ky * ksum.ky
    return math.exp(-s2 * w * w / 4.0)


def sinc(x):
    """sin(x)/x with sinc(0) = 1, series-evaluated near zero.

    Scalar or ndarray. The |x| < 1e-4 branch keeps the relative error below
    1e-12 where sin(x)/x would lose digits to cancellation.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    x2 = x * x
    series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.where(small, 1.0, np.sin(np.where(small, 1.0, x)) / np.where(small, 1.0, x))
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def phase_matching_amplitude(length_m: float, dk, envelope=1.0):
    """Complex phase-matching amplitude envelope * sinc(L dk/2) * exp(-i L dk/2)."""
    if length_m <= 0:
        raise ValidationError(f"crystal length must be positive, got {length_m!r}")
    arg = 0.5 * length_m * np.asarray(dk, dtype=float)
    amp = np.asarray(envelope) * sinc(arg) * np.exp(-1j * arg)
    return complex(amp) if amp.ndim == 0 else amp
