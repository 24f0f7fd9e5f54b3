import numpy as np
import pytest
from scipy import integrate
from sklearn.base import clone

from sdr_causal import (
    CauseSpec,
    CoefficientSampler,
    Decision,
    FirFilter,
    SdrReport,
    SICInference,
    Spectrum,
    WelchConfig,
    analytic_psd,
    decide,
    effect_spectrum,
    fit_whitener,
    forward_backward_bound,
    generate_pair,
    infer_direction,
    report_from_spectra,
    sample_fir,
    sdr_forward_from_filter,
    sdr_from_spectra,
)
from sdr_causal.spectral import spectral_ratio_mean


def test_two_bin_toy():
    rho = sdr_from_spectra(Spectrum([1.0, 3.0]), Spectrum([2.0, 3.0]))
    assert rho == pytest.approx(2.5 / 3.0, rel=1e-14)


def test_white_cause_and_identity_mechanism_give_one():
    rng = np.random.default_rng(0)
    S_yy = Spectrum(rng.gamma(1.0, 1.0, 32) + 0.01)
    assert sdr_from_spectra(Spectrum(np.full(32, 2.5)), S_yy) == pytest.approx(1.0, rel=1e-14)
    assert sdr_from_spectra(S_yy, S_yy) == pytest.approx(1.0, rel=1e-14)


def test_ratio_mean_examples():
    S = Spectrum([1.0, 2.0, 3.0, 2.0])
    assert spectral_ratio_mean(S, S, 0.0) == 1.0
    assert spectral_ratio_mean(Spectrum(np.full(4, 2.0)), Spectrum(np.full(4, 4.0))) == 0.5
    h2 = effect_spectrum(Spectrum(np.ones(1024)), FirFilter(np.array([1.0, 1.0]) / np.sqrt(2)))
    assert spectral_ratio_mean(h2, Spectrum(np.ones(1024))) == pytest.approx(1.0, rel=1e-12)


def _ar1_shape(nu, a=0.9):
    return 1.0 / (1.0 + a * a - 2.0 * a * np.cos(2 * np.pi * nu))


def test_differencer_on_ar1_matches_quadrature():
    S = analytic_psd(CauseSpec.ar1(0.9), 4096)
    f = FirFilter([1.0, -1.0])
    h2 = lambda nu: 2.0 - 2.0 * np.cos(2 * np.pi * nu)
    num = integrate.quad(lambda nu: _ar1_shape(nu) * h2(nu), -0.5, 0.5, points=[0.0], limit=200)[0]
    den = integrate.quad(_ar1_shape, -0.5, 0.5, points=[0.0], limit=200)[0] * 2.0
    oracle = num / den
    # closed form: 2 (C(0) - C(1)) / (2 C(0)) = 1 - a; a high-pass on a low-pass cause gives rho < 1
    assert oracle == pytest.approx(0.1, rel=1e-10)
    assert sdr_forward_from_filter(S, f) == pytest.approx(oracle, rel=1e-9)
    assert sdr_from_spectra(S, effect_spectrum(S, f)) == pytest.approx(oracle, rel=1e-9)


def test_filter_path_equals_spectrum_path():
    S = analytic_psd(CauseSpec.ar2(0.5, -0.3), 2048)
    for seed in range(10):
        f = sample_fir(24, CoefficientSampler(), seed)
        assert sdr_forward_from_filter(S, f) == pytest.approx(
            sdr_from_spectra(S, effect_spectrum(S, f)), rel=1e-12)


def test_decide_rule_and_tie():
    assert decide(1.2, 0.4) is Decision.X_TO_Y
    assert decide(0.4, 1.2) is Decision.Y_TO_X
    assert decide(1.0, 1.0 + 1e-12) is Decision.TIE
    assert Decision.X_TO_Y.swapped() is Decision.Y_TO_X


def test_fb_identity_filter_is_equality_case():
    fb = forward_backward_bound(FirFilter([1.0]), 64)
    assert fb.cv == 0.0 and fb.product == pytest.approx(1.0) and fb.bound == 1.0


def test_fb_product_does_not_depend_on_cause():
    f = sample_fir(16, CoefficientSampler(), 3)
    products = []
    for cause in (CauseSpec.white(), CauseSpec.ar1(0.7), CauseSpec.powerlaw(1.5)):
        S = analytic_psd(cause, 1024)
        rep = report_from_spectra(S, effect_spectrum(S, f))
        products.append(rep.fb_product)
    np.testing.assert_allclose(products, forward_backward_bound(f, 1024).product, rtol=1e-9)


def test_fb_bound_against_quadrature():
    b = np.array([2.0, 1.0]) / np.sqrt(5.0)
    h2 = lambda nu: 1.0 + 0.8 * np.cos(2 * np.pi * nu)  # |2 + e^{-i w}|^2 / 5
    mean_inv = integrate.quad(lambda nu: 1.0 / h2(nu), -0.5, 0.5)[0]
    cv2 = integrate.quad(lambda nu: h2(nu) ** 2, -0.5, 0.5)[0] - 1.0
    alpha = 2.0 - 1.8
    fb = forward_backward_bound(FirFilter(b), 4096)
    assert fb.alpha == pytest.approx(alpha, rel=1e-12)
    assert fb.product == pytest.approx(1.0 / mean_inv, rel=1e-9)
    assert fb.bound == pytest.approx(1.0 / (1.0 + alpha * cv2), rel=1e-9)
    assert fb.product <= fb.bound


def test_white_noise_pair_is_inferred_forward():
    good = 0
    for seed in range(200):
        pair = generate_pair(CauseSpec.white(), 64, N=2**16, seed=seed)
        rep = infer_direction(pair.x, pair.y)
        good += rep.decision is Decision.X_TO_Y and 0.9 <= rep.rho_forward <= 1.1
        if seed < 5:
            assert infer_direction(pair.y, pair.x).decision is Decision.Y_TO_X
    assert good >= 190


def test_estimated_matches_analytic_for_ar1_cause():
    within = 0
    rng = np.random.default_rng(1)
    for seed in range(200):
        m = int(rng.integers(1, 65))
        pair = generate_pair(CauseSpec.ar1(0.5), m, N=2**16, seed=seed)
        analytic = sdr_forward_from_filter(pair.true_Sxx, pair.true_filter)
        within += abs(infer_direction(pair.x, pair.y).rho_forward - analytic) <= 0.1
    assert within >= 180


def test_identical_series_tie():
    x = np.random.default_rng(2).standard_normal(4096)
    rep = infer_direction(x, x, WelchConfig(256))
    assert rep.rho_forward == pytest.approx(1.0) and rep.rho_backward == pytest.approx(1.0)
    assert rep.decision is Decision.TIE


def test_report_json_round_trip():
    rep = SdrReport(1.1, 0.5, Decision.X_TO_Y, 0.55)
    assert SdrReport.from_json(rep.to_json()) == rep


def test_estimator_api():
    pair = generate_pair(CauseSpec.ar1(0.9), 32, N=2**14, seed=4)
    est = SICInference(segment_length=512)
    assert clone(est).get_params()["segment_length"] == 512
    a = est.fit(pair.x, pair.y)
    b = clone(est).fit(np.column_stack([pair.x, pair.y]))
    assert a.rho_forward_ == b.rho_forward_
    assert a.decision_ is Decision.X_TO_Y
    with pytest.raises(ValueError):
        clone(est).fit(pair.x)


def test_estimator_with_whitener():
    pair = generate_pair(CauseSpec.powerlaw(1.0), 16, N=2**14, seed=5)
    raw = SICInference(segment_length=512).fit(pair.x, pair.y)
    wh = fit_whitener(list(raw.spectra_))
    white = SICInference(segment_length=512, whitener=wh).fit(pair.x, pair.y)
    assert white.rho_forward_ != raw.rho_forward_
