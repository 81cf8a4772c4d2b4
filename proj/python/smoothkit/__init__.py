"""Continuous-time linear-Gaussian filtering, smoothing, and conditional
path sampling."""

from ._core import (
    CoefficientProvider,
    ConditionalPathBatch,
    ConfidenceBand,
    ConfigError,
    FilterResult,
    ModelSpec,
    NumericalError,
    ObservationPath,
    SimulationOutput,
    SmoothingResult,
    TimeGrid,
    band_containment,
    bf_smooth,
    confidence_band,
    direct_integral_smooth,
    estimate_functional,
    fixed_point_smooth,
    innovations,
    kalman_bucy,
    load_model,
    make_model,
    parse_model_json,
    prior_mean_path,
    rts_smooth,
    sample_conditional_paths,
    simulate,
    static_scalar_posterior,
    validate_model,
    __version__,
)

__all__ = [
    "CoefficientProvider",
    "ConditionalPathBatch",
    "ConfidenceBand",
    "ConfigError",
    "FilterResult",
    "ModelSpec",
    "NumericalError",
    "ObservationPath",
    "SimulationOutput",
    "SmoothingResult",
    "TimeGrid",
    "band_containment",
    "bf_smooth",
    "confidence_band",
    "direct_integral_smooth",
    "estimate_functional",
    "fixed_point_smooth",
    "innovations",
    "kalman_bucy",
    "load_model",
    "make_model",
    "parse_model_json",
    "prior_mean_path",
    "rts_smooth",
    "sample_conditional_paths",
    "simulate",
    "static_scalar_posterior",
    "validate_model",
    "__version__",
]
