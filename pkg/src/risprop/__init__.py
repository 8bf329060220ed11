"""Orientation-uncertainty propagation for UAV-mounted RIS channels.

The chain: Type-A statistics of orientation errors -> distance and
amplitude/phase uncertainties per reflecting element -> complex covariance of
the effective Tx-RIS-Rx channel -> elliptical / annular coverage regions,
with a brute-force Monte Carlo oracle alongside the analytic path.
"""

from ._kernels import BACKEND
from .channel import (
    CONFIG_KINDS,
    CascadedChannel,
    EffectiveChannel,
    RisConfig,
    amp_phase,
    cascaded_channel,
    effective_channel,
    make_config,
)
from .complexprop import (
    ChainResult,
    ChainStageError,
    Covariance2,
    UncertainComplex,
    apply_phase_shift,
    cascaded_covariance,
    coupled_covariance,
    propagate_full_chain,
    sum_effective,
)
from .coverage import (
    K_ANNULUS_95,
    K_ANNULUS_REDUCED_95,
    K_ELLIPSE_95,
    AnnularSection,
    CoverageEllipse,
    DegenerateRegionError,
    annulus_from,
    coverage_probability,
    ellipse_from,
    region_area,
    region_contains,
    region_contains_many,
    success_rate,
)
from .dataio import (
    FlightLogError,
    OrientationErrorSeries,
    RunSettings,
    format_float,
    load_config,
    load_flight_log,
    preprocess,
    synthesize_series,
    write_flight_log,
)
from .experiment import (
    DEFAULT_K,
    REGION_KINDS,
    ComboAggregate,
    ExperimentError,
    ExperimentReport,
    PointRow,
    aggregates_from_rows,
    emit_report,
    read_points_table,
    run_experiment,
)
from .geometry import (
    ANGLE_AXES,
    SPEED_OF_LIGHT,
    DegenerateGeometryError,
    EulerAngles,
    RisGeometry,
    Scenario,
    default_scenario,
    distance,
    distance_sensitivities,
    distance_sensitivity,
    distances,
    element_position,
    element_positions,
    rotation_matrix,
    rotation_matrix_derivative,
    rotation_matrix_derivatives,
)
from .gumstats import InsufficientDataError, SampleStats, stats_per_angle, type_a_stats
from .lpu import (
    AmpPhaseUncertainty,
    AngleUncertainty,
    DistanceUncertainty,
    NotPositiveSemidefiniteError,
    amp_phase_angle_jacobian,
    amp_phase_uncertainties,
    amp_phase_uncertainty,
    distance_uncertainties,
    distance_uncertainty,
    phase_variance_closed_form,
    propagate_lpu,
    propagate_lpu_correlated,
)
from .montecarlo import (
    McConfig,
    McValidation,
    empirical_coverage,
    sample_covariance,
    sample_truths,
    validate_propagation,
)
from .seeding import (
    STREAM_CONFIG,
    STREAM_SYNTH,
    STREAM_TRUTH_DRAWS,
    STREAM_WINDOW,
    philox_generator,
)

__version__ = "0.1.0"

__all__ = [
    "ANGLE_AXES",
    "BACKEND",
    "CONFIG_KINDS",
    "DEFAULT_K",
    "K_ANNULUS_95",
    "K_ANNULUS_REDUCED_95",
    "K_ELLIPSE_95",
    "REGION_KINDS",
    "SPEED_OF_LIGHT",
    "STREAM_CONFIG",
    "STREAM_SYNTH",
    "STREAM_TRUTH_DRAWS",
    "STREAM_WINDOW",
    "AmpPhaseUncertainty",
    "AngleUncertainty",
    "AnnularSection",
    "CascadedChannel",
    "ChainResult",
    "ChainStageError",
    "ComboAggregate",
    "Covariance2",
    "CoverageEllipse",
    "DegenerateGeometryError",
    "DegenerateRegionError",
    "DistanceUncertainty",
    "EffectiveChannel",
    "EulerAngles",
    "ExperimentError",
    "ExperimentReport",
    "FlightLogError",
    "InsufficientDataError",
    "McConfig",
    "McValidation",
    "NotPositiveSemidefiniteError",
    "OrientationErrorSeries",
    "PointRow",
    "RisConfig",
    "RisGeometry",
    "RunSettings",
    "SampleStats",
    "Scenario",
    "UncertainComplex",
    "aggregates_from_rows",
    "amp_phase",
    "amp_phase_angle_jacobian",
    "amp_phase_uncertainties",
    "amp_phase_uncertainty",
    "annulus_from",
    "apply_phase_shift",
    "cascaded_channel",
    "cascaded_covariance",
    "coupled_covariance",
    "coverage_probability",
    "default_scenario",
    "distance",
    "distance_sensitivities",
    "distance_sensitivity",
    "distance_uncertainties",
    "distance_uncertainty",
    "distances",
    "effective_channel",
    "element_position",
    "element_positions",
    "ellipse_from",
    "emit_report",
    "empirical_coverage",
    "format_float",
    "load_config",
    "load_flight_log",
    "make_config",
    "phase_variance_closed_form",
    "philox_generator",
    "preprocess",
    "propagate_full_chain",
    "propagate_lpu",
    "propagate_lpu_correlated",
    "read_points_table",
    "region_area",
    "region_contains",
    "region_contains_many",
    "rotation_matrix",
    "rotation_matrix_derivative",
    "rotation_matrix_derivatives",
    "run_experiment",
    "sample_covariance",
    "sample_truths",
    "stats_per_angle",
    "success_rate",
    "synthesize_series",
    "type_a_stats",
    "validate_propagation",
    "write_flight_log",
    "__version__",
]
