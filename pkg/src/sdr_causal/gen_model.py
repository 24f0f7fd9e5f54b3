"""Synthetic cause processes and the forward filtering model ``Y = h * X``."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from ._validation import check_positive_int
from .exceptions import ConfigError, GridMismatch, UnstableProcess
from .filters import CoefficientSampler, FirFilter, apply_filter, sample_fir
from .spectral import Spectrum, as_spectrum, grid_size, spectral_mean

MIN_BURN_IN = 1024

_KINDS = ("white", "ar1", "ar2", "powerlaw", "analytic_table")


@dataclass(frozen=True)
class CauseSpec:
    """A stationary Gaussian cause process.

    kind
        ``white``, ``ar1`` (``a1``), ``ar2`` (``a1``, ``a2``), ``powerlaw``
        with PSD proportional to ``(|nu| + floor) ** -exponent``, or
        ``analytic_table`` with an explicit ``table`` spectrum.
    power
        Variance of the process; every analytic PSD is scaled to this mean.
    """

    kind: str = "white"
    power: float = 1.0
    a1: float = 0.0
    a2: float = 0.0
    exponent: float = 1.0
    floor: float = 1e-3
    table: Spectrum = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown cause kind {self.kind!r}; choose from {_KINDS}")
        if not self.power > 0:
            raise ConfigError(f"power must be positive, got {self.power}")
        if self.kind == "ar1" and not abs(self.a1) < 1:
            raise UnstableProcess(f"AR(1) coefficient {self.a1} outside (-1, 1)")
        if self.kind == "ar2" and not _ar2_stationary(self.a1, self.a2):
            raise UnstableProcess(f"AR(2) coefficients ({self.a1}, {self.a2}) are not stationary")
        if self.kind == "powerlaw" and not self.floor > 0:
            raise ConfigError(f"power-law floor must be positive, got {self.floor}")
        if self.kind == "analytic_table":
            if self.table is None:
                raise ConfigError("analytic_table cause needs a table spectrum")
            object.__setattr__(self, "table", as_spectrum(self.table))
            if np.any(self.table.values <= 0):
                raise ConfigError("tabulated cause spectrum must be strictly positive")

    @classmethod
    def white(cls, power=1.0):
        return cls("white", power)

    @classmethod
    def ar1(cls, a, power=1.0):
        return cls("ar1", power, a1=a)

    @classmethod
    def ar2(cls, a1, a2, power=1.0):
        return cls("ar2", power, a1=a1, a2=a2)

    @classmethod
    def powerlaw(cls, exponent=1.0, floor=1e-3, power=1.0):
        return cls("powerlaw", power, exponent=exponent, floor=floor)

    @classmethod
    def from_table(cls, spectrum):
        spectrum = as_spectrum(spectrum)
        return cls("analytic_table", spectral_mean(spectrum), table=spectrum)

    @classmethod
    def parse(cls, text):
        """Parse ``kind[:p1,p2,...]``, e.g. ``ar1:0.9`` or ``powerlaw:1.5,0.001``.

        Positional parameters are: white ``power``; ar1 ``a, power``;
        ar2 ``a1, a2, power``; powerlaw ``exponent, floor, power``.
        """
        kind, _, rest = text.strip().partition(":")
        try:
            params = [float(p) for p in rest.split(",")] if rest else []
        except ValueError:
            raise ConfigError(f"cannot parse cause parameters in {text!r}") from None
        builders = {"white": (cls.white, 1), "ar1": (cls.ar1, 2),
                    "ar2": (cls.ar2, 3), "powerlaw": (cls.powerlaw, 3)}
        if kind not in builders:
            raise ConfigError(f"unknown cause {kind!r}; choose from {sorted(builders)}")
        build, max_params = builders[kind]
        if kind in ("ar1", "ar2") and len(params) < max_params - 1:
            raise ConfigError(f"{kind} needs at least {max_params - 1} parameter(s)")
        if len(params) > max_params:
            raise ConfigError(f"{kind} takes at most {max_params} parameters")
        return build(*params)

    def label(self):
        if self.kind == "white":
            return f"white:{self.power:g}"
        if self.kind == "ar1":
            return f"ar1:{self.a1:g},{self.power:g}"
        if self.kind == "ar2":
            return f"ar2:{self.a1:g},{self.a2:g},{self.power:g}"
        if self.kind == "powerlaw":
            return f"powerlaw:{self.exponent:g},{self.floor:g},{self.power:g}"
        return f"table:{self.table.M}"

    @property
    def ar_coeffs(self):
        """Autoregressive polynomial ``[1, -a1, -a2]`` (trailing zeros dropped)."""
        if self.kind == "ar1":
            return np.array([1.0, -self.a1])
        if self.kind == "ar2":
            return np.array([1.0, -self.a1, -self.a2])
        return np.array([1.0])


def _ar2_stationary(a1, a2):
    return abs(a2) < 1 and a1 + a2 < 1 and a2 - a1 < 1


def _shape(spec, nu):
    """Unnormalized PSD of ``spec`` at signed frequencies ``nu``."""
    if spec.kind == "white":
        return np.ones_like(nu)
    if spec.kind in ("ar1", "ar2"):
        z = np.exp(-2j * np.pi * nu)
        poly = spec.ar_coeffs
        denom = np.abs(np.polyval(poly[::-1], z)) ** 2
        return 1.0 / denom
    if spec.kind == "powerlaw":
        return (np.abs(nu) + spec.floor) ** (-spec.exponent)
    raise ConfigError("tabulated spectra have no closed form")


def analytic_psd(spec, grid):
    """Closed-form PSD of ``spec`` on a full-period grid, with mean ``power``."""
    M = grid_size(grid)
    if spec.kind == "analytic_table":
        if spec.table.M != M:
            raise GridMismatch(f"table has {spec.table.M} bins, requested grid {M}")
        return spec.table
    values = _shape(spec, np.fft.fftfreq(M))
    return Spectrum(values * (spec.power / values.mean()))


def _ar_innovation_variance(spec):
    if spec.kind == "ar1":
        return spec.power * (1.0 - spec.a1**2)
    a1, a2 = spec.a1, spec.a2
    gamma0_unit = (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2) ** 2 - a1**2))
    return spec.power / gamma0_unit


def burn_in_length(spec):
    """Warm-up samples for recursive AR generation.

    Ten correlation lengths ``1 / -ln(r)`` with ``r`` the largest root
    modulus of the AR recursion, never fewer than ``MIN_BURN_IN``.
    """
    roots = np.roots(spec.ar_coeffs) if spec.ar_coeffs.size > 1 else np.array([0.0])
    r = float(np.max(np.abs(roots))) if roots.size else 0.0
    if r <= 0:
        return MIN_BURN_IN
    return max(MIN_BURN_IN, int(np.ceil(10.0 / -np.log(r))))


def sample_cause(spec, N, seed=0, burn_in=None):
    """Draw ``N`` samples of the cause process; deterministic given ``seed``.

    White and AR causes are produced by recursive filtering of Gaussian
    innovations. The ``N`` innovations that end up in the output are drawn
    first, so changing ``burn_in`` only changes the warm-up transient.
    Power-law and tabulated causes are produced by spectral shaping of white
    noise and are circularly stationary.
    """
    N = check_positive_int(N, "N")
    rng = np.random.default_rng(seed)
    if spec.kind == "white":
        return np.sqrt(spec.power) * rng.standard_normal(N)
    if spec.kind in ("ar1", "ar2"):
        burn = burn_in_length(spec) if burn_in is None else int(burn_in)
        main = rng.standard_normal(N)
        warm = rng.standard_normal(burn)
        e = np.sqrt(_ar_innovation_variance(spec)) * np.concatenate([warm, main])
        return signal.lfilter([1.0], spec.ar_coeffs, e)[burn:]
    if spec.kind == "analytic_table":
        table = spec.table.values
        freqs = np.fft.rfftfreq(N)
        full = np.arange(table.size) / table.size
        target = np.interp(freqs, full, table, period=1.0)
    else:
        target = analytic_psd(spec, N).values[: N // 2 + 1]
    w = np.fft.rfft(rng.standard_normal(N))
    return np.fft.irfft(w * np.sqrt(target), n=N)


@dataclass(frozen=True)
class GeneratedPair:
    """A cause/effect pair with its ground truth.

    ``y[t] = sum_i b[i] x[t - delay - i]`` whenever ``t - delay - i >= 0``;
    ``x`` and ``y`` have the same length.
    """

    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    true_filter: FirFilter
    true_Sxx: Spectrum = field(repr=False)
    seed: int = 0
    cause: CauseSpec = None

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "y"])
        for a, b in zip(self.x, self.y):
            writer.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


def trial_streams(seed):
    """Independent ``(cause, filter, extra)`` seed sequences for one trial seed."""
    return tuple(np.random.SeedSequence(seed).spawn(3))


def generate_pair(spec, m, sampler=None, N=2**14, seed=0, grid=8192):
    """Sample a cause, a random length-``m`` filter and the filtered effect.

    The cause and the filter use independent streams derived from ``seed``.
    ``true_Sxx`` is the analytic cause PSD on ``grid`` bins (raised to at
    least ``16 m``).
    """
    m = check_positive_int(m, "m")
    N = check_positive_int(N, "N")
    if N <= m:
        raise ConfigError(f"N={N} must exceed the filter length m={m}")
    cause_seed, filter_seed, _ = trial_streams(seed)
    f = sample_fir(m, sampler or CoefficientSampler(), filter_seed)
    x_full = sample_cause(spec, N + m - 1, cause_seed)
    y = apply_filter(f, x_full)
    x = x_full[m - 1:]
    M = max(grid_size(grid), 16 * m)
    if spec.kind == "analytic_table":
        M = spec.table.M
    return GeneratedPair(x, y, f, analytic_psd(spec, M), seed, spec)
