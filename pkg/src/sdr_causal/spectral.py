"""Frequency grids, spectra and the spectral averaging operator.

All spectra live on a full-period uniform grid: bin ``k`` of a grid of size
``M`` sits at normalized frequency ``k / M`` in ``[0, 1)``. Negative
frequencies are represented by periodicity, so bin ``M - k`` is frequency
``-k / M``. On this grid the frequency average is the plain bin mean, which
makes discrete Parseval exact for filters shorter than ``M``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from ._validation import check_floor, check_series, is_power_of_two
from .exceptions import ConfigError, DegenerateSpectrum, GridMismatch, LagTooLarge, SeriesTooShort

DEFAULT_FLOOR_REL = 1e-8


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid of ``size`` bins over one period of normalized frequency."""

    size: int

    def __post_init__(self):
        if int(self.size) < 1:
            raise ConfigError(f"grid size must be >= 1, got {self.size}")
        object.__setattr__(self, "size", int(self.size))

    @property
    def frequencies(self):
        """Bin frequencies ``k / M`` in ``[0, 1)``."""
        return np.arange(self.size) / self.size

    @property
    def signed_frequencies(self):
        """Bin frequencies mapped to ``[-1/2, 1/2)``."""
        return np.fft.fftfreq(self.size)


def grid_size(grid):
    """Accept a FrequencyGrid or a plain integer."""
    if isinstance(grid, FrequencyGrid):
        return grid.size
    return FrequencyGrid(int(grid)).size


@dataclass(frozen=True)
class Spectrum:
    """Nonnegative power spectral density sampled on a full-period grid.

    ``values[k]`` is the power per unit normalized frequency at ``k / M``.
    The array is copied and made read-only on construction.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size < 1:
            raise ValueError("spectrum must have at least one bin")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum values must be finite")
        if np.any(v < 0):
            raise ValueError("spectrum values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def M(self):
        return self.values.size

    @property
    def grid(self):
        return FrequencyGrid(self.values.size)

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"Spectrum(M={self.M}, mean={self.values.mean():.6g})"

    def is_even(self, rtol=1e-12):
        mirrored = self.values[(-np.arange(self.M)) % self.M]
        return bool(np.allclose(self.values, mirrored, rtol=rtol, atol=0.0))

    def to_json(self):
        return {"grid": self.M, "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj):
        spec = cls(obj["values"])
        if "grid" in obj and int(obj["grid"]) != spec.M:
            raise GridMismatch(f"declared grid {obj['grid']} but {spec.M} values given")
        return spec


def as_spectrum(S):
    return S if isinstance(S, Spectrum) else Spectrum(S)


def symmetrize(values):
    """Average ``values`` with its mirror image ``values[-k mod M]``."""
    v = np.asarray(values, dtype=np.float64)
    return 0.5 * (v + v[(-np.arange(v.size)) % v.size])


def check_same_grid(*spectra):
    sizes = {s.M for s in spectra}
    if len(sizes) > 1:
        raise GridMismatch(f"spectra live on different grids: sizes {sorted(sizes)}")


def floored(values, floor_rel):
    """Clip ``values`` from below at ``floor_rel * max(values)``."""
    vmax = values.max()
    if vmax <= 0:
        raise DegenerateSpectrum("spectrum is identically zero")
    return np.maximum(values, floor_rel * vmax)


def spectral_mean(S):
    """Frequency average of a spectrum; equals the process power for a PSD."""
    return float(as_spectrum(S).values.mean())


def spectral_ratio_mean(S_num, S_den, floor_rel=DEFAULT_FLOOR_REL):
    """Frequency average of ``S_num / S_den`` with a floored denominator.

    The denominator is clipped at ``floor_rel * max(S_den)`` so that spectra
    estimated from data, which can touch zero, give a bounded ratio.
    """
    S_num, S_den = as_spectrum(S_num), as_spectrum(S_den)
    check_same_grid(S_num, S_den)
    den = floored(S_den.values, check_floor(floor_rel))
    return float(np.mean(S_num.values / den))


@dataclass(frozen=True)
class WelchConfig:
    """Parameters of the Welch averaged periodogram.

    The output grid size equals ``segment_length``.
    """

    segment_length: int = 1024
    overlap_fraction: float = 0.5
    window: str = "hann"

    def __post_init__(self):
        if not is_power_of_two(int(self.segment_length)) or self.segment_length < 2:
            raise ConfigError(f"segment_length must be a power of two >= 2, got {self.segment_length}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ConfigError(f"overlap_fraction must lie in [0, 1), got {self.overlap_fraction}")
        if self.window not in ("hann", "rectangular"):
            raise ConfigError(f"window must be 'hann' or 'rectangular', got {self.window!r}")

    @property
    def M(self):
        return self.segment_length

    @property
    def noverlap(self):
        return int(round(self.overlap_fraction * self.segment_length))

    def to_json(self):
        return {
            "segment_length": self.segment_length,
            "overlap_fraction": self.overlap_fraction,
            "window": self.window,
        }


def estimate_psd_welch(ts, cfg=None):
    """Welch PSD estimate on the full-period grid of size ``cfg.segment_length``.

    Segments are mean-detrended and tapered; the density scaling includes the
    window power correction, so ``spectral_mean`` of the result estimates the
    (centered) sample power. The output is symmetrized to be exactly even.
    """
    cfg = cfg or WelchConfig()
    x = check_series(ts, "time series")
    if x.size < cfg.segment_length:
        raise SeriesTooShort(
            f"series of length {x.size} is shorter than segment_length {cfg.segment_length}"
        )
    window = "hann" if cfg.window == "hann" else "boxcar"
    _, pxx = signal.welch(
        x,
        fs=1.0,
        window=window,
        nperseg=cfg.segment_length,
        noverlap=cfg.noverlap,
        detrend="constant",
        return_onesided=False,
        scaling="density",
    )
    return Spectrum(np.maximum(symmetrize(pxx), 0.0))


def autocovariance(ts, max_lag):
    """Biased sample autocovariance ``C(0..max_lag)`` of the centered series."""
    x = check_series(ts, "time series")
    n = x.size
    if max_lag < 0 or max_lag >= n:
        raise LagTooLarge(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    xc = x - x.mean()
    nfft = 1 << int(2 * n - 1).bit_length()
    spec = np.abs(np.fft.rfft(xc, nfft)) ** 2
    acov = np.fft.irfft(spec, nfft)[: max_lag + 1] / n
    return acov
