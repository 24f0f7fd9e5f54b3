"""Decimation by an integer factor behind an ideal anti-aliasing low-pass."""

from typing import NamedTuple

import numpy as np

from ._validation import check_positive_int, check_series
from .exceptions import ConfigError, GridMismatch, SeriesTooShort
from .filters import apply_filter, squared_frequency_response
from .gen_model import CauseSpec, analytic_psd, sample_cause, trial_streams
from .sdr import SdrReport, infer_direction
from .spectral import DEFAULT_FLOOR_REL, Spectrum, WelchConfig, as_spectrum

DEFAULT_TRIM_FRACTION = 0.05


def ideal_lowpass(x, D):
    """Zero every Fourier bin with ``|nu| >= 1 / (2 D)``.

    Works on the whole-series transform, so the filter is circular; callers
    that care about edges trim the ends afterwards.
    """
    D = check_positive_int(D, "D")
    x = check_series(x, "input series", min_length=2 * D)
    X = np.fft.rfft(x)
    X[np.fft.rfftfreq(x.size) >= 1.0 / (2 * D)] = 0.0
    return np.fft.irfft(X, n=x.size)


def decimate(x, D):
    """Keep every ``D``-th sample starting with the first."""
    D = check_positive_int(D, "D")
    return check_series(x, "input series")[::D].copy()


def trim_edges(x, fraction=DEFAULT_TRIM_FRACTION):
    if not 0.0 <= fraction < 0.5:
        raise ConfigError(f"trim fraction must lie in [0, 0.5), got {fraction}")
    cut = int(np.floor(fraction * x.size))
    return x[cut: x.size - cut] if cut else x


def lowpass_decimate(x, D, trim_fraction=DEFAULT_TRIM_FRACTION):
    """Ideal low-pass, trim both ends, then keep every ``D``-th sample."""
    if D == 1:
        return check_series(x, "input series").copy()
    return decimate(trim_edges(ideal_lowpass(x, D), trim_fraction), D)


def decimated_psd_prediction(S, D, grid=None):
    """PSD of the decimated process: ``S(nu / D) / D`` for ``|nu| <= 1/2``.

    ``S`` is sampled at signed frequencies ``nu / D`` of the output grid
    (``S.M`` bins by default) using periodic linear interpolation; when
    ``S.M == D * grid`` every point falls on a bin and the result is exact.
    """
    S = as_spectrum(S)
    D = check_positive_int(D, "D")
    if S.M % D:
        raise GridMismatch(f"grid size {S.M} is not divisible by D={D}")
    M_out = S.M if grid is None else int(grid)
    if D == 1 and M_out == S.M:
        return S
    target = np.fft.fftfreq(M_out) / D
    src = np.arange(S.M) / S.M
    values = np.interp(target % 1.0, src, S.values, period=1.0)
    return Spectrum(values / D)


def band_constant(S, D):
    """``max S`` over the retained band divided by its one-sided integral."""
    S = as_spectrum(S)
    nu = np.abs(np.fft.fftfreq(S.M))
    band = nu < 1.0 / (2 * D)
    one_sided = band & (np.fft.fftfreq(S.M) >= 0)
    integral = S.values[one_sided].sum() / S.M
    return float(S.values[band].max() / integral)


class DecimatedResult(NamedTuple):
    report: SdrReport
    K: float
    cv_decimated: float


def decimated_sdr_experiment(cause, f, D, N, seed=0, welch=None,
                             floor_rel=DEFAULT_FLOOR_REL,
                             trim_fraction=DEFAULT_TRIM_FRACTION):
    """Filter a sampled cause with ``f``, decimate both streams, infer direction.

    ``cause`` is a :class:`CauseSpec` or a tabulated cause :class:`Spectrum`.

    Returns the inference report on the decimated pair, the band constant
    ``K`` of the analytic cause PSD, and the coefficient of variation of the
    decimated squared response over the retained band.
    """
    welch = welch or WelchConfig()
    if isinstance(cause, Spectrum):
        cause = CauseSpec.from_table(cause)
    cause_seed = trial_streams(seed)[0]
    x_full = sample_cause(cause, N + f.m - 1, cause_seed)
    y = apply_filter(f, x_full)
    x = x_full[f.m - 1:]
    xd = lowpass_decimate(x, D, trim_fraction)
    yd = lowpass_decimate(y, D, trim_fraction)
    if xd.size < welch.segment_length:
        raise SeriesTooShort(
            f"decimated series has {xd.size} samples, need {welch.segment_length}"
        )
    report = infer_direction(xd, yd, welch, floor_rel)
    if cause.kind == "analytic_table":
        M = cause.table.M
    else:
        M = max(8192, 16 * f.m * D)
    S = analytic_psd(cause, M)
    h2 = squared_frequency_response(f, M).values
    band = np.abs(np.fft.fftfreq(M)) < 1.0 / (2 * D)
    h2b = h2[band]
    cv = float(h2b.std() / h2b.mean())
    return DecimatedResult(report, band_constant(S, D), cv)
