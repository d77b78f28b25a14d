import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udfp.simplex import RngStream, normalize_to_simplex, sample_dirichlet
from udfp.validation import check_portfolio


def dirichlet_mean_se(alpha, n):
    """Standard error of the empirical component means of n Dirichlet draws."""
    alpha = np.asarray(alpha, dtype=float)
    total = alpha.sum()
    var = alpha * (total - alpha) / (total**2 * (total + 1.0))
    return np.sqrt(var / n)


class TestRngStream:
    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            RngStream(-1)

    def test_rejects_oversized_stream_id(self):
        with pytest.raises(ValueError):
            RngStream(0, 2**64)

    def test_distinct_streams_differ(self):
        a = RngStream(9, 0).generator().random(8)
        b = RngStream(9, 1).generator().random(8)
        assert not np.array_equal(a, b)

    def test_subkey_opens_independent_stream(self):
        base = RngStream(9, 3)
        assert not np.array_equal(
            base.generator().random(8), base.generator(subkey=0).random(8)
        )


class TestSampleDirichlet:
    def test_uniform_alpha_component_means(self):
        samples = sample_dirichlet([1.0, 1.0, 1.0], 100_000, RngStream(7))
        se = dirichlet_mean_se([1.0, 1.0, 1.0], 100_000)
        assert np.all(np.abs(samples.mean(axis=0) - 1.0 / 3.0) < 4 * se)

    def test_tilted_alpha_means_match_gamma_oracle(self):
        # Independent oracle: normalize Gamma draws from numpy's own PCG64
        # generator, entirely outside the sampler under test.
        alpha = np.array([2.0, 1.0, 1.0])
        n = 100_000
        gen = np.random.default_rng(123456)
        oracle = gen.standard_gamma(alpha, size=(n, 3))
        oracle /= oracle.sum(axis=1, keepdims=True)
        oracle_means = oracle.mean(axis=0)

        samples = sample_dirichlet(alpha, n, RngStream(7, 1))
        se = dirichlet_mean_se(alpha, n)
        assert np.all(np.abs(samples.mean(axis=0) - np.array([0.5, 0.25, 0.25])) < 4 * se)
        # oracle and sampler estimate the same means; allow both MC errors
        assert np.all(np.abs(samples.mean(axis=0) - oracle_means) < 8 * se)

    def test_single_sample_is_on_simplex(self):
        (sample,) = sample_dirichlet([0.7, 3.0], 1, RngStream(11))
        assert sample.min() >= 0.0
        assert abs(sample.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize(
        "alpha", [[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [0.5, 0.5], [4.0, 2.0, 1.0]]
    )
    def test_moment_check(self, alpha):
        n = 100_000
        samples = sample_dirichlet(alpha, n, RngStream(21, 5))
        expected = np.asarray(alpha) / np.sum(alpha)
        se = dirichlet_mean_se(alpha, n)
        assert np.all(np.abs(samples.mean(axis=0) - expected) < 4 * se)

    def test_reproducible_bit_for_bit(self):
        a = sample_dirichlet([0.3, 2.0, 5.0], 1000, RngStream(99, 4))
        b = sample_dirichlet([0.3, 2.0, 5.0], 1000, RngStream(99, 4))
        assert np.array_equal(a, b)

    @given(
        alpha=st.lists(
            st.floats(min_value=0.05, max_value=50.0, allow_nan=False),
            min_size=2,
            max_size=8,
        ),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_every_sample_satisfies_portfolio_invariants(self, alpha, seed):
        samples = sample_dirichlet(alpha, 50, RngStream(seed))
        for row in samples:
            check_portfolio(row)

    @pytest.mark.parametrize("bad", [[0.0, 1.0], [-1.0, 2.0], [np.nan, 1.0], [np.inf, 1.0]])
    def test_invalid_alpha_rejected(self, bad):
        with pytest.raises(ValueError):
            sample_dirichlet(bad, 10, RngStream(0))

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            sample_dirichlet([1.0, 1.0], 0, RngStream(0))

    def test_tiny_alpha_rows_survive_underflow(self):
        samples = sample_dirichlet([0.05, 0.05], 5000, RngStream(3))
        assert np.all(samples.sum(axis=1) > 0)
        assert np.all(np.abs(samples.sum(axis=1) - 1.0) <= 1e-12)


class TestNormalizeToSimplex:
    def test_equal_components(self):
        assert np.array_equal(normalize_to_simplex([2.0, 2.0]), [0.5, 0.5])

    def test_vertex_is_fixed_point(self):
        assert np.array_equal(normalize_to_simplex([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])

    def test_divides_by_sum(self):
        assert np.array_equal(normalize_to_simplex([1.0, 3.0]), [0.25, 0.75])

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_to_simplex([0.0, 0.0])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            normalize_to_simplex([1.0, -0.5])
