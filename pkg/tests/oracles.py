"""Independent brute-force oracles, written before the package implementation.

Everything here is deliberately dumb and self-contained (math module only,
scalar loops, no imports from spdcmodes) so that agreement with the package
is a genuine two-route check and not a tautology.
"""
import math


def sellmeier_index(a, b, c, d, wavelength_um):
    """One-line evaluation of n^2 = A + B/(lam^2 - C) - D lam^2."""
    lam2 = wavelength_um * wavelength_um
    return math.sqrt(a + b / (lam2 - c) - d * lam2)


def extraordinary_index(n_o, n_e, theta):
    """Index ellipsoid: 1/n(theta)^2 = cos^2/n_o^2 + sin^2/n_e^2."""
    ct, st = math.cos(theta), math.sin(theta)
    return 1.0 / math.sqrt(ct * ct / (n_o * n_o) + st * st / (n_e * n_e))


def exit_point(length, depth, theta, phi, walkoff):
    """Exit-face coordinates of one emission sample.

    x = sin(phi) (L - a) tan(theta); y = cos(phi) (L - a) tan(theta) - a tan(rho).
    """
    x = math.sin(phi) * (length - depth) * math.tan(theta)
    y = math.cos(phi) * (length - depth) * math.tan(theta) - depth * math.tan(walkoff)
    return x, y


def sinc_series(x):
    """sin(x)/x via Taylor series, accurate to ~1e-16 for |x| < 0.1."""
    x2 = x * x
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0


def sinc_half_power_point(tol=1e-10):
    """Bisect for the x > 0 where sinc(x)^2 = 1/2."""
    def f(x):
        s = math.sin(x) / x
        return s * s - 0.5
    lo, hi = 1e-6, math.pi / 2
    assert f(lo) > 0 > f(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def walkoff_from_derivative(n_of_theta, theta, h=1e-7):
    """Walk-off angle as atan(|dn/dtheta| / n) from a central difference."""
    dn = (n_of_theta(theta + h) - n_of_theta(theta - h)) / (2.0 * h)
    return math.atan(abs(dn) / n_of_theta(theta))


def gaussian_lobe_width(sigma):
    """1/e^2 full width of a Gaussian intensity lobe exp(-(r-r0)^2/(2 sigma^2))."""
    return 4.0 * sigma


def power_law_points(amplitude, exponent, lengths):
    return [(length, amplitude * length ** exponent) for length in lengths]
