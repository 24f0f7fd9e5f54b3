"""Whitening and the frequency-translation view of spectral independence.

A whitener is fitted on a whole dataset: its gain is the reciprocal of the
average PSD, so the dataset average becomes flat. The same whitener must be
applied to both series of a pair; whitening each series separately would
flatten both PSDs and erase the signal.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_floor, check_series
from .exceptions import EmptyCollection, GridMismatch
from .filters import squared_frequency_response
from .spectral import (
    DEFAULT_FLOOR_REL,
    Spectrum,
    as_spectrum,
    check_same_grid,
    floored,
    spectral_mean,
)


@dataclass(frozen=True)
class Whitener:
    """Squared-magnitude gain ``|w(nu)|^2`` on a grid, plus its scale ``gamma``."""

    gain: Spectrum
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "gain", as_spectrum(self.gain))
        if np.any(self.gain.values <= 0):
            raise ValueError("whitener gain must be strictly positive")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def M(self):
        return self.gain.M

    def inverse(self):
        return Whitener(Spectrum(1.0 / self.gain.values), 1.0 / self.gamma)

    def to_json(self):
        return {"gain": self.gain.values.tolist(), "gamma": self.gamma, "grid": self.M}

    @classmethod
    def from_json(cls, obj):
        gain = Spectrum(obj["gain"])
        if int(obj.get("grid", gain.M)) != gain.M:
            raise GridMismatch(f"declared grid {obj['grid']} but gain has {gain.M} bins")
        return cls(gain, float(obj["gamma"]))


def fit_whitener(spectra, floor_rel=DEFAULT_FLOOR_REL):
    """Gain ``gamma / mean_spectrum`` with power-preserving ``gamma``.

    ``gamma`` is chosen so that the whitened average spectrum keeps the
    power of the raw average spectrum.
    """
    spectra = [as_spectrum(s) for s in spectra]
    if not spectra:
        raise EmptyCollection("cannot fit a whitener on zero spectra")
    check_same_grid(*spectra)
    avg = np.mean([s.values for s in spectra], axis=0)
    den = floored(avg, check_floor(floor_rel))
    gamma = float(avg.mean() / np.mean(avg / den))
    return Whitener(Spectrum(gamma / den), gamma)


def apply_whitener(wh, S):
    S = as_spectrum(S)
    if S.M != wh.M:
        raise GridMismatch(f"whitener has {wh.M} bins but spectrum has {S.M}")
    return Spectrum(wh.gain.values * S.values)


def whiten_series(wh, x):
    """Time-domain whitening: scale the series transform by ``sqrt(gain)``.

    The gain is interpolated periodically onto the series' own frequency
    grid, so the series length need not match the whitener grid.
    """
    x = check_series(x, "input series")
    freqs = np.fft.rfftfreq(x.size)
    grid = np.arange(wh.M) / wh.M
    g = np.interp(freqs, grid, wh.gain.values, period=1.0)
    return np.fft.irfft(np.fft.rfft(x) * np.sqrt(g), n=x.size)


def translate_one_sided(S, shift):
    """Shift the one-sided PSD by ``shift`` bins modulo 1/2 and re-evenize.

    The half-period circle has ``M / 2`` points because frequencies 0 and
    1/2 are identified; the value at that shared point is the average of
    the DC and Nyquist bins.
    """
    S = as_spectrum(S)
    M = S.M
    if M % 2:
        raise GridMismatch(f"translations need an even grid, got M={M}")
    half = M // 2
    circle = S.values[:half].copy()
    circle[0] = 0.5 * (S.values[0] + S.values[half])
    one_sided = np.roll(circle, shift)
    out = np.empty(M)
    out[:half] = one_sided
    out[half] = one_sided[0]
    out[half + 1:] = one_sided[1:][::-1]
    return Spectrum(out)


def expected_generic_contrast(S_xx, f):
    """Output power averaged over all half-period translations of ``S_xx``.

    Averaging over the whole translation group flattens the cause spectrum
    to its mean, so the result equals ``<S_xx> <|h|^2>``.
    """
    S_xx = as_spectrum(S_xx)
    if S_xx.M % 2:
        raise GridMismatch(f"translations need an even grid, got M={S_xx.M}")
    if not S_xx.is_even(rtol=1e-9):
        raise ValueError("expected_generic_contrast needs an even-symmetric spectrum")
    h2 = squared_frequency_response(f, S_xx.M).values
    contrasts = [
        float(np.mean(h2 * translate_one_sided(S_xx, g).values)) for g in range(S_xx.M // 2)
    ]
    return float(np.mean(contrasts))


def genericity_ratio(S_xx, f):
    """Actual output power over its expected generic value."""
    S_xx = as_spectrum(S_xx)
    h2 = squared_frequency_response(f, S_xx.M).values
    return float(np.mean(h2 * S_xx.values)) / expected_generic_contrast(S_xx, f)


class SpectralWhitener(TransformerMixin, BaseEstimator):
    """Scikit-learn transformer that fits a dataset-wide whitener.

    ``fit`` takes a sequence of spectra (or an ``(n_spectra, M)`` array);
    ``transform`` whitens spectra given the same way and returns an array
    of whitened values.
    """

    def __init__(self, floor_rel=DEFAULT_FLOOR_REL):
        self.floor_rel = floor_rel

    def fit(self, X, y=None):
        self.whitener_ = fit_whitener(_spectra(X), self.floor_rel)
        return self

    def transform(self, X):
        check_is_fitted(self, "whitener_")
        return np.array([apply_whitener(self.whitener_, s).values for s in _spectra(X)])

    def transform_series(self, x):
        check_is_fitted(self, "whitener_")
        return whiten_series(self.whitener_, x)


def _spectra(X):
    if isinstance(X, Spectrum):
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [Spectrum(row) for row in X]
    return [as_spectrum(s) for s in X]
