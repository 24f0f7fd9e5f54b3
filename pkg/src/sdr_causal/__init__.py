"""Spectral-independence causal inference for stationary time series.

Given two series assumed to be related by a linear time-invariant filter,
the direction of the filter is inferred from the spectral dependency ratio:
the cause spectrum is expected to be uncorrelated with the squared
frequency response of the mechanism.
"""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DegenerateDraw,
    DegenerateSpectrum,
    EmptyCollection,
    GridMismatch,
    LagTooLarge,
    SDRError,
    SeriesTooShort,
    UnstableProcess,
)
from .spectral import (
    DEFAULT_FLOOR_REL,
    FrequencyGrid,
    Spectrum,
    WelchConfig,
    autocovariance,
    estimate_psd_welch,
    spectral_mean,
    spectral_ratio_mean,
)
from .filters import (
    CoefficientSampler,
    FirFilter,
    RadiusDistribution,
    apply_filter,
    cv_squared_response,
    filter_energy,
    sample_fir,
    squared_frequency_response,
)
from .sdr import (
    Decision,
    SdrReport,
    SICInference,
    decide,
    effect_spectrum,
    forward_backward_bound,
    infer_direction,
    report_from_spectra,
    sdr_forward_from_filter,
    sdr_from_spectra,
)
from .info_geometry import (
    DivergenceDecomposition,
    divergence_to_white_manifold,
    igci_decomposition,
    relative_entropy_rate,
)
from .gen_model import CauseSpec, GeneratedPair, analytic_psd, generate_pair, sample_cause
from .resampling import (
    band_constant,
    decimated_psd_prediction,
    decimated_sdr_experiment,
    lowpass_decimate,
)
from .invariance import (
    SpectralWhitener,
    Whitener,
    apply_whitener,
    expected_generic_contrast,
    fit_whitener,
    genericity_ratio,
    whiten_series,
)
from .harness import ExperimentConfig, ExperimentResult, run_experiment

__all__ = [
    name for name, obj in list(globals().items())
    if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))
]
