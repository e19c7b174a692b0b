import math

import numpy as np
import pytest

from moltiming.analysis import (
    err_exp_fa,
    err_exp_ml,
    fa_threshold_asymptote,
    g_function,
    g_root,
    g_stationary_point,
    gray_error_ceiling,
    max_bits_for_m,
    mismatch_bound,
    pe_fa,
    pe_gray,
    pe_gray_exact,
    pe_ml_single,
)
from moltiming.channels import LevyParams, levy_sample
from moltiming.detectors import fa_threshold, ml_threshold_single

# error-exponent regression table: (c, delta) -> (full-likelihood, first-arrival)
EXPONENT_TABLE = {
    (0.5, 0.1): (0.044106, 0.025674),
    (0.5, 0.2): (0.132051, 0.120865),
    (0.5, 0.3): (0.223149, 0.219034),
    (0.5, 0.4): (0.306514, 0.305917),
    (1.0, 0.1): (0.012413, 0.001567),
    (1.0, 0.2): (0.044103, 0.025674),
    (1.0, 0.3): (0.086111, 0.070304),
    (1.0, 0.4): (0.132012, 0.120865),
    (2.0, 0.1): (0.003230, 0.000008),
    (2.0, 0.2): (0.012413, 0.001567),
    (2.0, 0.3): (0.026441, 0.009872),
    (2.0, 0.4): (0.044099, 0.025674),
}


class TestPeMlSingle:
    def test_wide_spacing_limit(self):
        assert pe_ml_single(1.0, 1e9) < 1e-4

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(50)
        c, delta, n = 1.0, 1.0, 10**7
        theta = ml_threshold_single(c, delta)
        sym = rng.integers(0, 2, size=n)
        y = sym * delta + levy_sample(LevyParams(0.0, c), rng, size=n)
        p_hat = float(np.mean((y >= theta).astype(int) != sym))
        want = pe_ml_single(c, delta)
        sigma = math.sqrt(want * (1 - want) / n)
        assert abs(p_hat - want) < 3 * sigma

    def test_scale_invariance(self):
        assert pe_ml_single(1.0, 1.0) == pytest.approx(pe_ml_single(3.0, 3.0), abs=1e-10)

    def test_in_open_interval(self):
        for c, delta in ((0.5, 0.2), (2.0, 1.0), (1.0, 10.0)):
            assert 0.0 < pe_ml_single(c, delta) < 0.5


class TestPeFa:
    def test_reference_values(self):
        assert pe_fa(1.0, 1.0, 2) == pytest.approx(0.2186, abs=5e-4)
        assert pe_fa(1.0, 5.0, 5) == pytest.approx(0.002408, abs=5e-5)
        assert pe_fa(1.0, 5.0, 2) == pytest.approx(0.05898, abs=5e-4)
        assert pe_fa(1.0, 1.0, 5) == pytest.approx(0.06554, abs=5e-4)

    def test_large_count_small_spacing(self):
        got = pe_fa(2.0, 0.1, 20_000)
        assert 2e-4 / 1.5 < got < 2e-4 * 1.5

    def test_single_particle_reduction(self):
        assert pe_fa(1.0, 1.0, 1) == pytest.approx(pe_ml_single(1.0, 1.0), rel=1e-12)

    def test_decreasing_in_count_and_spacing(self):
        for delta in (0.5, 1.0, 3.0):
            vals = [pe_fa(1.0, delta, m) for m in (1, 2, 5, 20, 100)]
            assert all(b < a for a, b in zip(vals, vals[1:]))
        for m in (1, 3, 10):
            vals = [pe_fa(1.0, d, m) for d in (0.25, 0.5, 1.0, 2.0, 8.0)]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_channel_asymmetry_at_threshold(self):
        # miss probability for the early symbol dwarfs the late one
        from scipy.special import erfc

        for c in (0.5, 1.0, 2.0):
            for delta in (0.5, 1.0, 5.0):
                theta = ml_threshold_single(c, delta)
                early = 1.0 - float(erfc(math.sqrt(c / (2 * theta))))
                late = float(erfc(math.sqrt(c / (2 * (theta - delta)))))
                assert early > late


class TestPeGray:
    def test_single_bit_equals_binary(self):
        assert pe_gray(1.0, 1.0, 1, 3) == pytest.approx(pe_fa(1.0, 1.0, 3), rel=1e-12)

    def test_reference_operating_point(self):
        got = pe_gray(1.0, 3.0, 3, 25)
        assert 0.005 < got < 0.02

    def test_guessing_ceiling(self):
        # vanishing sub-spacing drives the binary error to 1/2, which puts
        # the exact count right at the random-guess ceiling 1 - 2^(-L)
        exact = pe_gray_exact(1.0, 0.01, 4, 2)
        ceiling = gray_error_ceiling(4)
        assert exact == pytest.approx(ceiling, rel=1e-2)
        assert pe_gray(1.0, 0.01, 4, 2) <= ceiling

    def test_monte_carlo_agreement(self):
        from moltiming.montecarlo import simulate_pe

        want = pe_gray(1.0, 3.0, 2, 10)
        stats = simulate_pe("gray_fa", {"c": 1.0, "delta": 3.0, "bits": 2, "m": 10}, 10**6, 51)
        sigma = math.sqrt(want * (1 - want) / stats.trials)
        assert abs(stats.p_hat - want) < 3 * sigma


class TestGFunction:
    def test_sign_pattern(self):
        c, delta = 1.0, 1.0
        x_star = g_root(c, delta)
        for x in np.linspace(delta * 1.0001, x_star * 0.999, 50):
            assert g_function(c, delta, x) > 0
        for x in np.linspace(x_star * 1.001, 50.0, 50):
            assert g_function(c, delta, x) < 0

    def test_stationary_point_matches_derivative_root(self):
        c, delta = 1.0, 1.0
        x1 = g_stationary_point(c, delta)
        h = 1e-6
        deriv = (g_function(c, delta, x1 + h) - g_function(c, delta, x1 - h)) / (2 * h)
        assert abs(deriv) < 1e-8
        # and it is a minimum
        assert g_function(c, delta, x1) < g_function(c, delta, x1 * 0.9)
        assert g_function(c, delta, x1) < g_function(c, delta, x1 * 1.1)

    def test_lower_stationary_point_below_domain(self):
        for c in (0.3, 1.0, 2.0, 8.0):
            for delta in (0.2, 1.0, 5.0):
                x2 = c / 3.0 + 0.5 * delta * (
                    1.0 - math.sqrt(1.0 + 4.0 * c * c / (9.0 * delta * delta))
                )
                assert x2 - delta < 0

    def test_root_equals_single_threshold(self):
        # the per-arrival term vanishes exactly at the single-arrival threshold
        for c, delta in ((1.0, 1.0), (2.0, 0.5), (0.3, 4.0)):
            assert g_root(c, delta) == pytest.approx(ml_threshold_single(c, delta), abs=1e-10)

    def test_domain_check(self):
        with pytest.raises(ValueError):
            g_function(1.0, 1.0, 0.5)


class TestMismatchBound:
    @pytest.mark.parametrize(
        "c,delta,m,want,tol",
        [
            (1.0, 1.0, 2, 0.0283, 5e-4),
            (1.0, 5.0, 2, 0.0012, 1e-4),
            (1.0, 1.0, 5, 0.0337, 5e-4),
            (1.0, 5.0, 5, 0.001, 1e-4),
        ],
    )
    def test_reference_values(self, c, delta, m, want, tol):
        assert mismatch_bound(c, delta, m).bound == pytest.approx(want, abs=tol)

    def test_fields(self):
        mb = mismatch_bound(1.0, 1.0, 2)
        assert mb.x_star > 1.0
        assert mb.x1 > mb.x_star
        assert 0.0 <= mb.bound <= 1.0

    def test_loosens_with_count(self):
        assert mismatch_bound(1.0, 1.0, 5).bound > mismatch_bound(1.0, 1.0, 2).bound


class TestErrExpFa:
    def test_table_regression(self):
        for (c, delta), (_, fa) in EXPONENT_TABLE.items():
            assert err_exp_fa(c, delta).value == pytest.approx(fa, abs=1e-6)

    def test_ratio_invariance(self):
        assert err_exp_fa(1.0, 0.2).value == pytest.approx(err_exp_fa(2.0, 0.4).value, rel=1e-12)

    def test_metadata(self):
        r = err_exp_fa(0.5, 0.1)
        assert r.method == "closed_form"
        assert r.optimizer_s is None
        assert r.value > 0


class TestErrExpMl:
    def test_reference_cells(self):
        assert err_exp_ml(0.5, 0.1).value == pytest.approx(0.044106, abs=5e-4)
        assert err_exp_ml(2.0, 0.4).value == pytest.approx(0.044099, abs=5e-4)

    def test_dominates_first_arrival_exponent(self):
        for c, delta in EXPONENT_TABLE:
            assert err_exp_ml(c, delta).value >= err_exp_fa(c, delta).value

    def test_metadata(self):
        r = err_exp_ml(1.0, 0.1)
        assert r.method == "chernoff_numeric"
        assert 0.0 < r.optimizer_s < 1.0

    def test_scale_invariance(self):
        a = err_exp_ml(0.5, 0.1).value
        b = err_exp_ml(1.0, 0.2).value
        d = err_exp_ml(2.0, 0.4).value
        assert a == pytest.approx(b, abs=1e-6)
        assert b == pytest.approx(d, abs=1e-6)


class TestThresholdAsymptote:
    def test_positive(self):
        for c in (0.5, 1.0, 2.0):
            for delta in (0.2, 1.0, 5.0):
                assert fa_threshold_asymptote(c, delta) > 0

    def test_slope_fit(self):
        c, delta = 2.0, 1.0
        d1 = fa_threshold_asymptote(c, delta)
        ms = np.unique(np.round(np.logspace(3, 5, 15)).astype(int))
        gaps = np.array([fa_threshold(c, delta, int(m)) - delta for m in ms])
        slope = float(np.polyfit(1.0 / ms, gaps, 1)[0])
        assert abs(slope - d1) / d1 < 0.2

    def test_balance_at_large_count(self):
        # m e^{-c m / (2 d1)} = m e^{-m E} stays bounded (and tiny) at m = 1e4
        c, delta = 2.0, 1.0
        d1 = fa_threshold_asymptote(c, delta)
        m = 10**4
        assert m * math.exp(-c * m / (2.0 * d1)) < 1.0


class TestMaxBits:
    def test_monotone_in_count(self):
        assert max_bits_for_m(1.0, 3.0, 350, 0.1) >= max_bits_for_m(1.0, 3.0, 25, 0.1)

    def test_doubling_count_reduces_error(self):
        assert pe_gray(1.0, 3.0, 3, 50) < pe_gray(1.0, 3.0, 3, 25)

    def test_published_pairs_hit_one_percent(self):
        # each pair reaches a symbol error of about 0.01 near a 3-second span
        for m, bits in ((25, 3), (90, 4), (350, 5)):
            best = min(
                (pe_gray(1.0, d, bits, m) for d in (2.75, 3.0, 3.25, 3.5)),
                key=lambda p: abs(math.log(p / 0.01)),
            )
            assert 0.005 < best < 0.02

    def test_validation(self):
        with pytest.raises(ValueError):
            max_bits_for_m(1.0, 3.0, 1, 0.1)
        with pytest.raises(ValueError):
            max_bits_for_m(1.0, 3.0, 16, 1.5)


class TestPeMlMc:
    def test_wrapper_matches_engine(self):
        from moltiming.analysis import pe_ml_mc
        from moltiming.montecarlo import simulate_pe

        a = pe_ml_mc(1.0, 1.0, 2, 50_000, 6)
        b = simulate_pe("ml", {"c": 1.0, "delta": 1.0, "m": 2}, 50_000, 6)
        assert a.errors == b.errors
        assert a.trials == b.trials


class TestExponentConsistency:
    def test_empirical_exponent_near_closed_form(self):
        # the operating point keeps m*E below the underflow ceiling while the
        # threshold is already close to its limit
        c, delta, m = 0.75, 0.1, 10**5
        e_fa = err_exp_fa(c, delta).value
        emp = -math.log(pe_fa(c, delta, m)) / m
        assert abs(emp - e_fa) / e_fa < 0.05
