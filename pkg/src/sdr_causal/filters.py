"""FIR mechanisms: convolution, frequency responses and random generation.

A mechanism is a finite impulse response ``h`` with ``h[k + i] = b[i]`` for
``i = 0..m-1`` and zero elsewhere. Random mechanisms follow either a
spherically symmetric law ``B = R U`` (``U`` uniform on the unit sphere) or
iid unit-variance coefficients scaled by ``1 / sqrt(m)``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_floor, check_positive_int, check_series
from .exceptions import ConfigError, DegenerateDraw, DegenerateSpectrum, SeriesTooShort
from .spectral import DEFAULT_FLOOR_REL, Spectrum, as_spectrum, floored, grid_size, symmetrize

_MAX_REDRAWS = 16


@dataclass(frozen=True)
class FirFilter:
    coeffs: np.ndarray = field(repr=False)
    delay: int = 0

    def __post_init__(self):
        b = np.array(self.coeffs, dtype=np.float64).ravel()
        if b.size < 1:
            raise ValueError("filter needs at least one coefficient")
        if not np.all(np.isfinite(b)):
            raise ValueError("filter coefficients must be finite")
        b.setflags(write=False)
        object.__setattr__(self, "coeffs", b)
        object.__setattr__(self, "delay", int(self.delay))

    @property
    def m(self):
        return self.coeffs.size

    def __repr__(self):
        return f"FirFilter(m={self.m}, delay={self.delay}, energy={filter_energy(self):.6g})"

    def scaled(self, c):
        return FirFilter(c * self.coeffs, self.delay)

    def to_json(self):
        return {"coeffs": self.coeffs.tolist(), "delay": self.delay}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["coeffs"], int(obj.get("delay", 0)))


def identity_filter():
    return FirFilter([1.0])


def apply_filter(f, x):
    """Convolve ``x`` with the filter, keeping only fully-overlapped samples.

    The output has ``N - m + 1`` samples. Output sample ``n`` is the filter
    response at input time ``n + m - 1 + f.delay``; the delay only shifts the
    time labels, it never discards extra samples.
    """
    x = check_series(x, "input series")
    if x.size < f.m:
        raise SeriesTooShort(f"input of length {x.size} is shorter than the filter ({f.m} taps)")
    return np.convolve(x, f.coeffs, mode="valid")


def squared_frequency_response(f, grid):
    """``|h(k/M)|^2`` on a grid of size ``M``.

    When ``M < m`` the taps are folded modulo ``M`` first, which gives the
    exact DTFT values at the grid points.
    """
    M = grid_size(grid)
    b = f.coeffs
    if b.size > M:
        b = np.bincount(np.arange(b.size) % M, weights=b, minlength=M)
    h2 = np.abs(np.fft.fft(b, M)) ** 2
    return Spectrum(symmetrize(h2))


def filter_energy(f):
    return float(np.dot(f.coeffs, f.coeffs))


def cv_squared_response(f, grid):
    """Coefficient of variation (std / mean over frequency) of ``|h|^2``."""
    h2 = squared_frequency_response(f, grid).values
    mean = h2.mean()
    if mean <= 0:
        raise DegenerateSpectrum("filter has zero energy")
    return float(np.sqrt(np.mean((h2 - mean) ** 2)) / mean)


def invert_response(S_h2, floor_rel=DEFAULT_FLOOR_REL):
    """Reciprocal of a squared response, i.e. ``|h_backward|^2``."""
    S_h2 = as_spectrum(S_h2)
    return Spectrum(1.0 / floored(S_h2.values, check_floor(floor_rel)))


@dataclass(frozen=True)
class RadiusDistribution:
    """Law of the radius ``R`` in ``B = R U``.

    ``kind="constant"`` always returns ``r``; ``kind="chi"`` returns the norm
    of ``m`` fresh iid standard normals.
    """

    kind: str = "constant"
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "chi"):
            raise ConfigError(f"unknown radius kind {self.kind!r}")
        if self.kind == "constant" and not self.r > 0:
            raise ConfigError(f"constant radius must be positive, got {self.r}")

    def draw(self, m, rng):
        if self.kind == "constant":
            return float(self.r)
        return float(np.linalg.norm(rng.standard_normal(m)))


_IID_DISTS = ("standard_normal", "rademacher", "uniform_pm_sqrt3")


@dataclass(frozen=True)
class CoefficientSampler:
    """Random law of the filter taps.

    ``kind="spherical"`` draws ``R U``; ``kind="iid"`` draws zero-mean,
    unit-variance taps from ``dist`` and scales them by ``1 / sqrt(m)``.
    """

    kind: str = "spherical"
    radius: RadiusDistribution = RadiusDistribution()
    dist: str = "standard_normal"

    def __post_init__(self):
        if self.kind not in ("spherical", "iid"):
            raise ConfigError(f"unknown sampler kind {self.kind!r}")
        if self.kind == "iid" and self.dist not in _IID_DISTS:
            raise ConfigError(f"unknown iid distribution {self.dist!r}; choose from {_IID_DISTS}")

    @property
    def label(self):
        if self.kind == "spherical":
            return "spherical" if self.radius.kind == "constant" else "spherical-chi"
        return {"standard_normal": "normal", "rademacher": "rademacher",
                "uniform_pm_sqrt3": "uniform"}[self.dist]

    @classmethod
    def from_label(cls, label):
        """Parse the short names used on the command line."""
        table = {
            "spherical": cls(),
            "spherical-chi": cls(radius=RadiusDistribution("chi")),
            "normal": cls(kind="iid", dist="standard_normal"),
            "rademacher": cls(kind="iid", dist="rademacher"),
            "uniform": cls(kind="iid", dist="uniform_pm_sqrt3"),
        }
        try:
            return table[label]
        except KeyError:
            raise ConfigError(f"unknown sampler {label!r}; choose from {sorted(table)}") from None


def _unit_vector(m, rng):
    for _ in range(_MAX_REDRAWS):
        z = rng.standard_normal(m)
        norm = np.linalg.norm(z)
        if norm > 1e-300:
            return z / norm
    raise DegenerateDraw(f"standard normal draw of dimension {m} was numerically zero")


def _iid_taps(m, dist, rng):
    if dist == "standard_normal":
        return rng.standard_normal(m)
    if dist == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), size=m)
    return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=m)


def sample_fir(m, sampler=None, seed=0):
    """Draw a random length-``m`` filter; deterministic given ``seed``."""
    m = check_positive_int(m, "m")
    sampler = sampler or CoefficientSampler()
    rng = np.random.default_rng(seed)
    if sampler.kind == "spherical":
        u = _unit_vector(m, rng)
        return FirFilter(sampler.radius.draw(m, rng) * u)
    for _ in range(_MAX_REDRAWS):
        b = _iid_taps(m, sampler.dist, rng) / np.sqrt(m)
        if np.any(b != 0):
            return FirFilter(b)
    raise DegenerateDraw(f"iid draw of {m} taps was identically zero")
