import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udfp.markets import (
    cauchy_schwarz_check,
    dominance_experiment,
    fn_log_ratio,
    fn_ratio,
    gen_single_factor,
    gen_two_factor,
    lognormal_returns,
    single_factor_excess_growth,
    two_factor_lower_bound,
)
from udfp.simplex import RngStream
from udfp.wealth import average_growth_rate

positive_betas = st.lists(
    st.floats(min_value=1e-3, max_value=10.0, allow_nan=False), min_size=2, max_size=20
)


class TestGenSingleFactor:
    def test_unit_betas_reproduce_the_market(self):
        np.testing.assert_array_equal(
            gen_single_factor([1.0, 1.0], [1.1]), [[1.1, 1.1]]
        )

    def test_componentwise_product(self):
        np.testing.assert_allclose(
            gen_single_factor([0.5, 2.0], [1.2]), [[0.6, 2.4]], rtol=1e-15
        )

    def test_flat_market_returns_betas(self):
        beta = np.array([0.7, 1.0, 1.3])
        out = gen_single_factor(beta, np.ones(5))
        for row in out:
            np.testing.assert_array_equal(row, beta)

    def test_rejects_non_positive_inputs(self):
        with pytest.raises(ValueError):
            gen_single_factor([1.0, 0.0], [1.1])
        with pytest.raises(ValueError):
            gen_single_factor([1.0, 1.0], [0.0])


class TestGenTwoFactor:
    def test_unit_exponents_multiply_factors(self):
        beta = np.ones((2, 2))
        f = np.array([[1.1, 1.2]])
        np.testing.assert_allclose(gen_two_factor(beta, f), [[1.32, 1.32]], rtol=1e-12)

    def test_unit_factor_returns_give_ones(self):
        beta = np.array([[0.5, 1.5], [2.0, 0.3]])
        np.testing.assert_allclose(gen_two_factor(beta, np.ones((4, 2))), np.ones((4, 2)), rtol=1e-15)

    def test_power_evaluation(self):
        beta = np.array([[2.0, 0.0], [1.0, 1.0]])
        f = np.array([[1.1, 1.0]])
        out = gen_two_factor(beta, f)
        assert out[0, 0] == pytest.approx(1.21, rel=1e-12)

    def test_rejects_negative_exponent(self):
        with pytest.raises(ValueError):
            gen_two_factor(np.array([[1.0, -0.1], [1.0, 1.0]]), np.ones((2, 2)))

    def test_rejects_non_positive_factor_returns(self):
        with pytest.raises(ValueError):
            gen_two_factor(np.ones((2, 2)), np.array([[1.0, 0.0]]))


class TestSingleFactorExcessGrowth:
    def test_vertex_selects_one_exposure(self):
        assert single_factor_excess_growth([0.0, 1.0, 0.0], [0.5, 1.5, 1.0]) == pytest.approx(
            math.log(1.5), rel=1e-12
        )

    def test_unit_betas_give_zero(self):
        assert single_factor_excess_growth([0.3, 0.7], [1.0, 1.0]) == pytest.approx(0.0, abs=1e-15)

    def test_balanced_exposures_cancel(self):
        assert single_factor_excess_growth([0.5, 0.5], [0.8, 1.2]) == pytest.approx(0.0, abs=1e-15)

    def test_growth_identity_on_generated_markets(self):
        # the model factorizes, so CRP growth minus market growth must equal
        # log(b . beta) to floating-point accuracy
        gen = np.random.default_rng(11)
        for _ in range(25):
            m = int(gen.integers(2, 11))
            n = int(gen.integers(2, 501))
            beta = gen.uniform(0.5, 2.0, m)
            b = gen.dirichlet(np.ones(m))
            market = lognormal_returns(n, 1e-4, 0.02, gen)
            xs = gen_single_factor(beta, market)
            crp = np.concatenate([[1.0], np.cumprod(xs @ b)])
            mkt = np.concatenate([[1.0], np.cumprod(market)])
            measured = average_growth_rate(crp) - average_growth_rate(mkt)
            assert measured == pytest.approx(single_factor_excess_growth(b, beta), abs=1e-9)


class TestTwoFactorLowerBound:
    def test_uniform_portfolio_has_exactly_zero_drag(self):
        for m in (2, 3, 5, 7):
            beta = np.random.default_rng(m).uniform(0.2, 2.0, size=(m, 2))
            g1, g2 = 0.03, -0.01
            bound = two_factor_lower_bound(beta, g1, g2, np.full(m, 1.0 / m))
            factor_part = beta[:, 0].mean() * g1 + beta[:, 1].mean() * g2
            assert bound == factor_part

    def test_identical_assets_hit_equality(self):
        # one shared factor, no second-factor exposure: every portfolio earns
        # exactly the factor return, so the bound is attained
        n = 64
        r1 = np.full(n, math.exp(0.05))
        factors = np.column_stack([r1, np.ones(n)])
        beta = np.array([[1.0, 0.0], [1.0, 0.0]])
        returns = gen_two_factor(beta, factors)
        b = np.array([0.5, 0.5])
        measured = float(np.log(returns @ b).mean())
        g1 = float(np.log(r1).mean())
        bound = two_factor_lower_bound(beta, g1, 0.0, b)
        assert bound == pytest.approx(0.05, rel=1e-12)
        assert measured == pytest.approx(bound, abs=1e-12)

    def test_zero_weight_gives_minus_infinity(self):
        beta = np.ones((3, 2))
        assert two_factor_lower_bound(beta, 0.1, 0.1, [0.5, 0.5, 0.0]) == -np.inf

    def test_bound_holds_on_random_instances(self):
        gen = np.random.default_rng(12)
        for _ in range(200):
            m = int(gen.integers(2, 11))
            n = int(gen.integers(1, 201))
            beta = gen.uniform(0.0, 2.0, size=(m, 2))
            b = gen.dirichlet(np.ones(m))
            factors = np.column_stack([
                lognormal_returns(n, gen.uniform(-2e-3, 2e-3), gen.uniform(0.0, 0.05), gen),
                lognormal_returns(n, gen.uniform(-2e-3, 2e-3), gen.uniform(0.0, 0.05), gen),
            ])
            returns = gen_two_factor(beta, factors)
            gr_avg = float(np.log(returns @ b).mean())
            g1 = float(np.log(factors[:, 0]).mean())
            g2 = float(np.log(factors[:, 1]).mean())
            assert gr_avg - two_factor_lower_bound(beta, g1, g2, b) >= -1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            two_factor_lower_bound(np.ones((3, 2)), 0.0, 0.0, [0.5, 0.5])


class TestFnRatio:
    def test_constant_beta_is_exactly_one(self):
        for n in (1, 7, 100):
            assert fn_ratio([1.0, 1.0, 1.0], n) == 1.0

    def test_two_asset_hand_value(self):
        assert fn_ratio([1.0, 2.0], 1) == pytest.approx(2.0 * 5.0 / 9.0, rel=1e-14)

    def test_power_of_single_period_case(self):
        assert fn_ratio([1.0, 2.0], 3) == pytest.approx((10.0 / 9.0) ** 3, rel=1e-13)

    def test_overflow_returns_inf_with_log_available(self):
        beta = np.array([1.0, 100.0])
        huge = fn_ratio(beta, 10_000)
        assert math.isinf(huge)
        assert math.isfinite(fn_log_ratio(beta, 10_000))

    @given(beta=positive_betas, n=st.integers(min_value=1, max_value=100))
    @settings(max_examples=200, deadline=None)
    def test_at_least_one(self, beta, n):
        assert fn_ratio(beta, n) >= 1.0 - 1e-12

    @given(beta=positive_betas, a=st.integers(1, 50), b=st.integers(1, 50))
    @settings(max_examples=100, deadline=None)
    def test_multiplicative_in_periods(self, beta, a, b):
        combined = fn_ratio(beta, a + b)
        if math.isfinite(combined):
            assert combined == pytest.approx(fn_ratio(beta, a) * fn_ratio(beta, b), rel=1e-10)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            fn_ratio([1.0, 2.0], 0)
        with pytest.raises(ValueError):
            fn_ratio([1.0, -2.0], 3)
        with pytest.raises(ValueError):
            fn_ratio([1.0], 3)


class TestCauchySchwarz:
    def test_hand_arithmetic_three_four(self):
        check = cauchy_schwarz_check([3.0, 4.0])
        assert check.lhs == 49.0
        assert check.rhs == 50.0
        assert check.holds

    def test_constant_beta_equality(self):
        check = cauchy_schwarz_check([2.5, 2.5, 2.5])
        assert abs(check.lhs - check.rhs) <= 1e-12 * check.rhs
        assert check.holds

    def test_hand_arithmetic_spread(self):
        check = cauchy_schwarz_check([1.0, 100.0])
        assert check.lhs == 10201.0
        assert check.rhs == 20002.0
        assert check.holds

    @given(beta=positive_betas)
    @settings(max_examples=200, deadline=None)
    def test_always_holds(self, beta):
        check = cauchy_schwarz_check(beta)
        assert check.holds
        if np.ptp(beta) > 1e-3 * max(beta):
            assert check.lhs < check.rhs


class TestDominanceExperiment:
    def test_unit_beta_gives_exact_ratio_one(self):
        # identical sampling law and paired bitstreams: the two ensembles are
        # the same draws, so the ratio is exactly 1
        result = dominance_experiment(np.ones(4), 50, 500, RngStream(3, 1))
        assert result.ratio == pytest.approx(1.0, abs=1e-12)

    def test_zero_periods(self):
        result = dominance_experiment([0.5, 1.5], 0, 500, RngStream(0))
        assert result == (1.0, 1.0, 1.0, 0.0, 0.0)

    def test_tilted_beta_dominates_across_paired_seeds(self):
        beta = np.array([0.6, 0.8, 1.0, 1.2, 1.4])
        ratios = np.array([
            dominance_experiment(beta, 100, 1000, RngStream(17, s)).ratio for s in range(40)
        ])
        mean = ratios.mean()
        lower = mean - 1.645 * ratios.std(ddof=1) / math.sqrt(len(ratios))
        assert lower > 1.0

    def test_requires_enough_managers(self):
        with pytest.raises(ValueError):
            dominance_experiment([1.0, 2.0], 10, 99, RngStream(0))

    def test_requires_rng_stream(self):
        with pytest.raises(TypeError):
            dominance_experiment([1.0, 2.0], 10, 500, np.random.default_rng(0))

    def test_negative_beta_rejected_as_input(self):
        with pytest.raises(ValueError):
            dominance_experiment([1.0, -1.0], 10, 500, RngStream(0))
