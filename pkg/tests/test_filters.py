import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdr_causal import CoefficientSampler, FirFilter, apply_filter, sample_fir
from sdr_causal.exceptions import SeriesTooShort
from sdr_causal.filters import (
    RadiusDistribution,
    cv_squared_response,
    filter_energy,
    identity_filter,
    invert_response,
    squared_frequency_response,
)

coeff_lists = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=40).filter(
    lambda b: np.sum(np.square(b)) > 1e-6
)


def _dtft_squared(b, nu):
    k = np.arange(len(b))
    return np.abs(np.exp(-2j * np.pi * np.outer(nu, k)) @ np.asarray(b)) ** 2


def test_response_matches_direct_dtft():
    b = [0.5, -1.0, 0.25, 2.0, 0.1]
    M = 64
    h2 = squared_frequency_response(FirFilter(b), M).values
    np.testing.assert_allclose(h2, _dtft_squared(b, np.arange(M) / M), rtol=1e-12, atol=1e-12)


def test_two_tap_closed_form():
    # |1 + e^{-2 pi i nu}|^2 = 2 + 2 cos(2 pi nu)
    M = 16
    nu = np.arange(M) / M
    h2 = squared_frequency_response(FirFilter([1.0, 1.0]), M).values
    np.testing.assert_allclose(h2, 2 + 2 * np.cos(2 * np.pi * nu), atol=1e-12)


def test_delay_does_not_change_response():
    f = FirFilter([1.0, -0.5, 0.2])
    a = squared_frequency_response(f, 32).values
    b = squared_frequency_response(FirFilter(f.coeffs, delay=7), 32).values
    np.testing.assert_allclose(a, b)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, st.integers(0, 3))
def test_parseval_on_any_sufficient_grid(b, extra):
    M = 2 ** (int(np.ceil(np.log2(len(b)))) + extra)
    f = FirFilter(b)
    assert np.isclose(squared_frequency_response(f, M).values.mean(), filter_energy(f), rtol=1e-11)


def test_apply_filter_matches_loop():
    rng = np.random.default_rng(0)
    b, x = rng.standard_normal(4), rng.standard_normal(20)
    y = apply_filter(FirFilter(b), x)
    loop = [sum(b[i] * x[t - i] for i in range(4)) for t in range(3, 20)]
    np.testing.assert_allclose(y, loop)
    with pytest.raises(SeriesTooShort):
        apply_filter(FirFilter(b), x[:3])


def test_identity_and_constant_response():
    f = identity_filter()
    assert filter_energy(f) == 1.0
    assert cv_squared_response(f, 8) == 0.0


def test_invert_response_floors_zeros():
    inv = invert_response(squared_frequency_response(FirFilter([1.0, 1.0]), 4), 1e-8)
    assert np.isfinite(inv.values).all()
    assert inv.values.max() == pytest.approx(1 / (4 * 1e-8))


def test_spherical_sampler_has_unit_energy():
    for seed in range(20):
        f = sample_fir(17, CoefficientSampler(), seed)
        assert filter_energy(f) == pytest.approx(1.0)


def test_iid_sampler_energy_is_one_on_average():
    energies = [filter_energy(sample_fir(32, CoefficientSampler("iid"), s)) for s in range(400)]
    assert abs(np.mean(energies) - 1.0) < 0.05


def test_rademacher_taps_are_signs():
    f = sample_fir(9, CoefficientSampler.from_label("rademacher"), 3)
    np.testing.assert_allclose(np.abs(f.coeffs), 1 / 3)


def test_chi_radius_gives_gaussian_energy():
    # chi(m) radius times a uniform direction is an iid Gaussian vector: E||b||^2 = m
    sampler = CoefficientSampler("spherical", radius=RadiusDistribution("chi"))
    energies = [filter_energy(sample_fir(16, sampler, s)) for s in range(400)]
    assert abs(np.mean(energies) / 16 - 1.0) < 0.1


def test_iid_energy_concentrates_at_large_m():
    sampler = CoefficientSampler("iid")
    energies = np.array([filter_energy(sample_fir(256, sampler, s)) for s in range(1000)])
    assert np.mean(np.abs(energies - 1.0) < 0.3) >= 0.99


def test_one_tap_unit_sphere_is_sign():
    for seed in range(10):
        assert abs(sample_fir(1, CoefficientSampler(), seed).coeffs[0]) == pytest.approx(1.0)


def test_averaging_filter_hand_values():
    np.testing.assert_allclose(apply_filter(FirFilter([0.5, 0.5]), [1, 2, 3, 4]), [1.5, 2.5, 3.5])
    np.testing.assert_allclose(apply_filter(FirFilter([1, -1]), np.full(10, 3.0)), 0.0)


def test_half_band_response_and_cv():
    f = FirFilter(np.array([1.0, 1.0]) / np.sqrt(2))
    h2 = squared_frequency_response(f, 8).values
    assert h2[0] == pytest.approx(2.0) and h2[2] == pytest.approx(1.0)
    assert h2[4] == pytest.approx(0.0, abs=1e-15)
    assert cv_squared_response(f, 64) == pytest.approx(np.sqrt(0.5))
    assert cv_squared_response(f.scaled(7.0), 64) == pytest.approx(np.sqrt(0.5))


def test_sampling_is_deterministic():
    a = sample_fir(8, CoefficientSampler(), 11).coeffs
    b = sample_fir(8, CoefficientSampler(), 11).coeffs
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("label", ["spherical", "spherical-chi", "normal", "rademacher", "uniform"])
def test_sampler_labels_round_trip(label):
    assert CoefficientSampler.from_label(label).label == label


def test_filter_json_round_trip():
    f = FirFilter([0.1, 0.2], delay=3)
    g = FirFilter.from_json(f.to_json())
    assert g.delay == 3
    np.testing.assert_array_equal(g.coeffs, f.coeffs)
