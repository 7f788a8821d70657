"""Simulation and analysis of walk-off-distorted SPDC emission profiles."""

from .config import (
    CrystalConfig,
    ExperimentConfig,
    GeometryConfig,
    PumpConfig,
    RenderConfig,
    WavelengthConfig,
    load_config,
)
from .correction import (
    CouplingEstimate,
    LensSpec,
    apply_lens,
    golden_section,
    optimize_offset,
    propagate,
    smf_coupling_estimate,
)
from .crystal import (
    CrystalSpec,
    SellmeierCoefficients,
    Wavelengths,
    index_extraordinary,
    index_ordinary,
    load_crystal,
    solve_phasematch_angle,
    walkoff_angle,
    wavenumber,
)
from .errors import (
    AnalysisError,
    ConfigError,
    PhaseMatchError,
    RenderError,
    SpdcError,
    ValidationError,
    WavelengthRangeError,
)
from .metrics import (
    AsymmetryReport,
    asymmetry_factor,
    axis_thickness,
    find_ring_center,
    point_set_axis_widths,
    radial_width_profile,
    ring_peak_radius,
    sweep_af,
    write_sweep_csv,
)
from .modesim import (
    ImageSpec,
    ModeImage,
    RayBundle,
    RaySample,
    bandwidth_nodes,
    gaussian_blur,
    geometric_exit_point,
    render_geometric,
    render_wave,
    sample_geometric_mode,
)
from .phasematch import (
    MismatchComponents,
    TransverseK,
    mismatch_components,
    mismatch_with_walkoff,
    phase_matching_amplitude,
    pump_envelope,
    sinc,
)
from .pipeline import ModeGeometry, mode_geometry, render_experiment, render_through_lens
from .rates import (
    ChannelStats,
    CollectionEfficiency,
    ImprovementReport,
    PowerLawFit,
    collection_efficiency,
    improvement_factor,
    power_law_fit,
    read_rate_csv,
    write_rate_csv,
)

__version__ = "0.1.0"
