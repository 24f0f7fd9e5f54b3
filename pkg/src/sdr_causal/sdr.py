"""Spectral Dependency Ratios and the SIC direction-inference rule.

For a candidate cause ``X`` and effect ``Y`` with PSDs ``S_xx`` and ``S_yy``::

    rho_{X->Y} = <S_yy> / (<S_xx> <S_yy / S_xx>)

where ``<.>`` is the frequency average. The ratio equals one when the
mechanism's squared response is uncorrelated with the cause spectrum. The
inference rule picks the direction with the larger ratio.
"""

import enum
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_floor, check_series
from .exceptions import DegenerateSpectrum
from .filters import filter_energy, invert_response, squared_frequency_response
from .invariance import apply_whitener
from .spectral import (
    DEFAULT_FLOOR_REL,
    Spectrum,
    WelchConfig,
    as_spectrum,
    check_same_grid,
    estimate_psd_welch,
    spectral_mean,
    spectral_ratio_mean,
)

DEFAULT_TIE_TOLERANCE = 1e-9


class Decision(str, enum.Enum):
    X_TO_Y = "XtoY"
    Y_TO_X = "YtoX"
    TIE = "tie"

    def swapped(self):
        return {Decision.X_TO_Y: Decision.Y_TO_X,
                Decision.Y_TO_X: Decision.X_TO_Y,
                Decision.TIE: Decision.TIE}[self]


@dataclass(frozen=True)
class SdrReport:
    rho_forward: float
    rho_backward: float
    decision: Decision
    fb_product: float
    cv_response: Optional[float] = None
    fb_bound: Optional[float] = None
    alpha_margin: Optional[float] = None

    def to_json(self):
        out = asdict(self)
        out["decision"] = self.decision.value
        return out

    @classmethod
    def from_json(cls, obj):
        fields = dict(obj)
        fields["decision"] = Decision(fields["decision"])
        return cls(**fields)


def decide(rho_forward, rho_backward, tie_tolerance=DEFAULT_TIE_TOLERANCE):
    """The SIC rule: the direction with the larger SDR wins.

    Ratios within ``tie_tolerance`` (relative) of each other are a tie.
    """
    if abs(rho_forward - rho_backward) <= tie_tolerance * max(abs(rho_forward), abs(rho_backward)):
        return Decision.TIE
    return Decision.X_TO_Y if rho_forward > rho_backward else Decision.Y_TO_X


def sdr_from_spectra(S_xx, S_yy, floor_rel=DEFAULT_FLOOR_REL):
    """SDR from cause to effect computed from the two PSDs only."""
    S_xx, S_yy = as_spectrum(S_xx), as_spectrum(S_yy)
    check_same_grid(S_xx, S_yy)
    p_x, p_y = spectral_mean(S_xx), spectral_mean(S_yy)
    if p_x <= 0 or p_y <= 0:
        raise DegenerateSpectrum("both spectra need a positive mean")
    return p_y / (p_x * spectral_ratio_mean(S_yy, S_xx, floor_rel))


def sdr_forward_from_filter(S_xx, f):
    """SDR as output power over (input power times filter energy).

    Uses ``S_yy = |h|^2 S_xx`` on the grid of ``S_xx``; exact when the grid
    has at least as many bins as the filter has taps.
    """
    S_xx = as_spectrum(S_xx)
    p_x = spectral_mean(S_xx)
    energy = filter_energy(f)
    if p_x <= 0 or energy <= 0:
        raise DegenerateSpectrum("cause spectrum and filter need positive power")
    h2 = squared_frequency_response(f, S_xx.M).values
    return float(np.mean(h2 * S_xx.values)) / (p_x * energy)


def effect_spectrum(S_xx, f):
    """Effect PSD ``|h|^2 S_xx`` on the cause grid."""
    S_xx = as_spectrum(S_xx)
    return Spectrum(squared_frequency_response(f, S_xx.M).values * S_xx.values)


class FBBound(NamedTuple):
    """Forward-backward diagnostics of a mechanism on a grid."""

    bound: float
    alpha: float
    product: float
    cv: float


def forward_backward_bound(f, grid, floor_rel=DEFAULT_FLOOR_REL):
    """Bound on the product of forward and backward SDRs.

    ``alpha = 2 - max |h|^2 / ||h||^2`` (grid maximum); the bound is
    ``1 / (1 + alpha CV^2)`` when ``alpha > 0`` and 1 otherwise. ``product``
    is the exact value ``1 / (<|h|^2> <1/|h|^2>)``, which does not depend on
    the cause spectrum.
    """
    h2 = squared_frequency_response(f, grid)
    v = h2.values
    mean = v.mean()
    if mean <= 0:
        raise DegenerateSpectrum("filter has zero energy")
    cv = float(np.sqrt(np.mean((v - mean) ** 2)) / mean)
    alpha = float(2.0 - v.max() / filter_energy(f))
    bound = 1.0 / (1.0 + alpha * cv**2) if alpha > 0 else 1.0
    product = 1.0 / (mean * spectral_mean(invert_response(h2, floor_rel)))
    return FBBound(bound, alpha, product, cv)


def report_from_spectra(S_xx, S_yy, floor_rel=DEFAULT_FLOOR_REL,
                        tie_tolerance=DEFAULT_TIE_TOLERANCE, **extra):
    rho_f = sdr_from_spectra(S_xx, S_yy, floor_rel)
    rho_b = sdr_from_spectra(S_yy, S_xx, floor_rel)
    return SdrReport(
        rho_forward=rho_f,
        rho_backward=rho_b,
        decision=decide(rho_f, rho_b, tie_tolerance),
        fb_product=rho_f * rho_b,
        **extra,
    )


def infer_direction(x, y, welch=None, floor_rel=DEFAULT_FLOOR_REL,
                    tie_tolerance=DEFAULT_TIE_TOLERANCE):
    """Estimate both PSDs with Welch's method and apply the SIC rule."""
    welch = welch or WelchConfig()
    floor_rel = check_floor(floor_rel)
    S_xx = estimate_psd_welch(x, welch)
    S_yy = estimate_psd_welch(y, welch)
    return report_from_spectra(S_xx, S_yy, floor_rel, tie_tolerance)


class SICInference(BaseEstimator):
    """Scikit-learn style wrapper around :func:`infer_direction`.

    ``fit(X, y)`` takes the two series as ``X`` and ``y``, or a single
    ``(n_samples, 2)`` array with columns ``(x, y)``.

    Parameters
    ----------
    segment_length, overlap_fraction, window
        Welch settings, see :class:`WelchConfig`.
    floor_rel : float
        Relative floor for PSD denominators.
    tie_tolerance : float
        Relative gap under which the two SDRs count as equal.
    whitener : Whitener or None
        Applied identically to both PSDs before the ratios are computed.

    Attributes
    ----------
    rho_forward_, rho_backward_ : float
    decision_ : Decision
    report_ : SdrReport
    spectra_ : tuple of Spectrum
        Estimated ``(S_xx, S_yy)`` after optional whitening.
    """

    def __init__(self, segment_length=1024, overlap_fraction=0.5, window="hann",
                 floor_rel=DEFAULT_FLOOR_REL, tie_tolerance=DEFAULT_TIE_TOLERANCE,
                 whitener=None):
        self.segment_length = segment_length
        self.overlap_fraction = overlap_fraction
        self.window = window
        self.floor_rel = floor_rel
        self.tie_tolerance = tie_tolerance
        self.whitener = whitener

    def _welch(self):
        return WelchConfig(self.segment_length, self.overlap_fraction, self.window)

    def fit(self, X, y=None):
        if y is None:
            arr = np.asarray(X, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValueError("without y, X must have shape (n_samples, 2)")
            X, y = arr[:, 0], arr[:, 1]
        x = check_series(X, "X")
        y = check_series(y, "y")
        welch = self._welch()
        S_xx = estimate_psd_welch(x, welch)
        S_yy = estimate_psd_welch(y, welch)
        if self.whitener is not None:
            S_xx = apply_whitener(self.whitener, S_xx)
            S_yy = apply_whitener(self.whitener, S_yy)
        self.spectra_ = (S_xx, S_yy)
        self.report_ = report_from_spectra(S_xx, S_yy, self.floor_rel, self.tie_tolerance)
        self.rho_forward_ = self.report_.rho_forward
        self.rho_backward_ = self.report_.rho_backward
        self.decision_ = self.report_.decision
        return self
