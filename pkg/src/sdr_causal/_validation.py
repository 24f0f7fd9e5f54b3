"""Input validation helpers used at public entry points."""

import numbers

import numpy as np

from .exceptions import ConfigError, SeriesTooShort


def check_series(x, name="series", min_length=1):
    """Return ``x`` as a finite 1-D float64 array.

    Raises
    ------
    ValueError
        If ``x`` is not one-dimensional or contains NaN/Inf.
    SeriesTooShort
        If fewer than ``min_length`` samples are present.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        arr = np.squeeze(arr)
        if arr.ndim != 1:
            raise ValueError(f"{name} must be one-dimensional, got shape {np.shape(x)}")
    if arr.size < min_length:
        raise SeriesTooShort(f"{name} has {arr.size} samples, need at least {min_length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_floor(floor_rel):
    floor_rel = float(floor_rel)
    if not np.isfinite(floor_rel) or floor_rel < 0:
        raise ConfigError(f"floor_rel must be a finite non-negative number, got {floor_rel}")
    return floor_rel


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n):
    return 1 << max(0, int(n - 1).bit_length())
