"""Exception types shared across the package."""


class SpdcError(Exception):
    """Base class for all package errors."""


class ValidationError(SpdcError):
    """Invalid argument or domain-object field."""


class WavelengthRangeError(ValidationError):
    """Wavelength outside a coefficient set's declared validity range."""


class PhaseMatchError(SpdcError):
    """No phase-matching solution in the search interval."""


class RenderError(SpdcError):
    """Image synthesis failed (empty image, unresolvable ring, ...)."""


class AnalysisError(SpdcError):
    """Image analysis failed (no ring, missing lobes, degenerate input)."""


class ConfigError(SpdcError):
    """Bad experiment configuration file."""
