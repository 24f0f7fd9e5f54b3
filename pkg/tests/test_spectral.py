import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdr_causal import DegenerateSpectrum, GridMismatch, Spectrum, WelchConfig
from sdr_causal.exceptions import ConfigError, LagTooLarge, SeriesTooShort
from sdr_causal.spectral import (
    FrequencyGrid,
    autocovariance,
    check_same_grid,
    estimate_psd_welch,
    floored,
    spectral_mean,
    spectral_ratio_mean,
    symmetrize,
)


def test_grid_frequencies_cover_full_period():
    g = FrequencyGrid(8)
    np.testing.assert_allclose(g.frequencies, np.arange(8) / 8)
    assert g.signed_frequencies.min() == -0.5
    assert g.signed_frequencies.max() < 0.5


def test_spectrum_is_read_only_copy():
    raw = np.array([1.0, 2.0, 3.0, 2.0])
    S = Spectrum(raw)
    raw[0] = 99.0
    assert S.values[0] == 1.0
    with pytest.raises(ValueError):
        S.values[0] = 5.0


@pytest.mark.parametrize("bad", [[1.0, -1.0], [1.0, np.nan], []])
def test_spectrum_rejects_invalid_values(bad):
    with pytest.raises(ValueError):
        Spectrum(bad)


def test_spectrum_json_round_trip():
    S = Spectrum([1.0, 0.5, 0.25, 0.5])
    back = Spectrum.from_json(json.loads(json.dumps(S.to_json())))
    np.testing.assert_array_equal(back.values, S.values)


def test_evenness_and_symmetrize():
    assert Spectrum([3.0, 2.0, 1.0, 2.0]).is_even()
    assert not Spectrum([1.0, 3.0, 3.0, 1.0]).is_even()
    v = symmetrize([1.0, 3.0, 3.0, 1.0])
    assert Spectrum(v).is_even()
    assert np.isclose(v.mean(), 2.0)


def test_grid_mismatch_detected():
    with pytest.raises(GridMismatch):
        check_same_grid(Spectrum(np.ones(4)), Spectrum(np.ones(8)))


def test_floor_is_relative_to_max():
    out = floored(np.array([0.0, 1e-12, 1.0]), 1e-8)
    np.testing.assert_array_equal(out, [1e-8, 1e-8, 1.0])
    with pytest.raises(DegenerateSpectrum):
        floored(np.zeros(3), 1e-8)


def test_ratio_mean_exact_fraction():
    # <[2, 4, 6, 4] / [1, 2, 1, 2]> = (2 + 2 + 6 + 2) / 4 = 3
    assert spectral_ratio_mean(Spectrum([2, 4, 6, 4]), Spectrum([1, 2, 1, 2])) == 3.0
    assert spectral_mean(Spectrum([2, 4, 6, 4])) == 4.0


def _welch_by_hand(x, L, step):
    """Averaged Hann periodograms with mean removal, density scaling, fs = 1."""
    n = np.arange(L)
    w = 0.5 - 0.5 * np.cos(2 * np.pi * n / L)
    acc = np.zeros(L)
    count = 0
    for start in range(0, x.size - L + 1, step):
        seg = x[start:start + L]
        seg = seg - seg.mean()
        acc += np.abs(np.fft.fft(w * seg)) ** 2 / np.sum(w**2)
        count += 1
    return acc / count


def test_welch_matches_hand_rolled_average():
    x = np.random.default_rng(0).standard_normal(4096)
    S = estimate_psd_welch(x, WelchConfig(256, 0.5))
    np.testing.assert_allclose(S.values, symmetrize(_welch_by_hand(x, 256, 128)), rtol=1e-10)


def test_welch_power_tracks_variance():
    x = 3.0 * np.random.default_rng(1).standard_normal(2**16)
    S = estimate_psd_welch(x, WelchConfig(512))
    assert abs(S.values.mean() / 9.0 - 1.0) < 0.03


def test_welch_config_validation_and_short_series():
    with pytest.raises(ConfigError):
        WelchConfig(256, 1.0)
    with pytest.raises(ConfigError):
        WelchConfig(256, window="blackman")
    with pytest.raises(SeriesTooShort):
        estimate_psd_welch(np.zeros(100), WelchConfig(256))


def test_autocovariance_matches_direct_sum():
    x = np.random.default_rng(2).standard_normal(300)
    c = autocovariance(x, 5)
    xc = x - x.mean()
    direct = [np.dot(xc[: x.size - k], xc[k:]) / x.size for k in range(6)]
    np.testing.assert_allclose(c, direct, rtol=1e-10, atol=1e-14)
    with pytest.raises(LagTooLarge):
        autocovariance(x, 300)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 100.0), min_size=2, max_size=64))
def test_symmetrized_spectrum_is_even_and_keeps_mean(values):
    v = symmetrize(values)
    assert Spectrum(v).is_even(rtol=1e-12)
    assert np.isclose(v.mean(), np.mean(values), rtol=1e-12)
