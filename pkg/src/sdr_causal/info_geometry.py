"""Relative entropy rates between stationary Gaussian processes.

Every quantity here is a per-sample rate in nats computed from PSDs. They
are KL rates only under the Gaussian model; nothing checks Gaussianity.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_floor
from .filters import squared_frequency_response
from .spectral import (
    DEFAULT_FLOOR_REL,
    Spectrum,
    as_spectrum,
    check_same_grid,
    floored,
    spectral_mean,
)
from .exceptions import DegenerateSpectrum


def relative_entropy_rate(S1, S2, floor_rel=DEFAULT_FLOOR_REL):
    """KL rate of the process with PSD ``S1`` relative to the one with ``S2``.

    ``0.5 * <r - 1 - ln r>`` with ``r = S1 / S2`` (floored denominator).
    """
    S1, S2 = as_spectrum(S1), as_spectrum(S2)
    check_same_grid(S1, S2)
    r = S1.values / floored(S2.values, check_floor(floor_rel))
    if np.any(r <= 0):
        raise DegenerateSpectrum("relative entropy rate needs a strictly positive S1")
    return float(0.5 * np.mean(r - 1.0 - np.log(r)))


def divergence_to_white_manifold(S):
    """Divergence from ``S`` to the closest white noise, and that noise's power.

    The closest white noise has the same power as ``S``; the divergence is
    ``-0.5 <ln(S / P)>``.
    """
    S = as_spectrum(S)
    power = spectral_mean(S)
    if power <= 0 or np.any(S.values <= 0):
        raise DegenerateSpectrum("spectrum must be strictly positive")
    return float(-0.5 * np.mean(np.log(S.values / power))), power


@dataclass(frozen=True)
class DivergenceDecomposition:
    """Terms of the irregularity decomposition of an effect process.

    ``d_y_to_manifold = d_x_to_manifold + d_arrow_py_to_uy + residual_term``
    up to rounding, with ``identity_gap`` the numerical remainder.
    """

    d_y_to_manifold: float
    d_x_to_manifold: float
    d_arrow_py_to_uy: float
    residual_term: float
    identity_gap: float
    rho_forward: float

    def to_json(self):
        out = asdict(self)
        out["note"] = "rates in nats; valid as KL rates only for Gaussian processes"
        return out


def igci_decomposition(S_xx, f, floor_rel=DEFAULT_FLOOR_REL):
    """Decompose the effect's divergence from white noise.

    The squared response is floored at ``floor_rel`` times its maximum, and
    that floored response is used consistently for every term so the identity
    stays exact.
    """
    S_xx = as_spectrum(S_xx)
    h2 = floored(squared_frequency_response(f, S_xx.M).values, check_floor(floor_rel))
    S_yy = Spectrum(h2 * S_xx.values)
    p_x = spectral_mean(S_xx)
    p_y = spectral_mean(S_yy)

    d_x, _ = divergence_to_white_manifold(S_xx)
    d_y, _ = divergence_to_white_manifold(S_yy)
    arrow = Spectrum(p_x * h2)
    d_arrow = relative_entropy_rate(arrow, Spectrum(np.full(S_xx.M, p_y)), floor_rel=0.0)

    rho = p_y / (p_x * float(np.mean(h2)))
    residual = 0.5 * (1.0 - 1.0 / rho)
    gap = d_y - d_x - d_arrow - residual
    return DivergenceDecomposition(d_y, d_x, d_arrow, residual, gap, rho)
