import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from csradar.analysis import (
    RicMethod,
    estimate_ric,
    probe_operator,
    ric_concentration_probe,
)
from csradar.errors import InvalidInputError, SizeError


class TestEstimateRic:
    def test_order_one_is_zero(self, rng):
        a = crandn(rng, 6, 10)
        est = estimate_ric(a, 1)
        assert est.delta_s == pytest.approx(0.0, abs=1e-12)
        assert est.supports_checked == 10

    def test_orthonormal_columns(self):
        q = np.linalg.qr(np.random.default_rng(0).standard_normal((8, 5)))[0]
        assert estimate_ric(3 * q, 3).delta_s == pytest.approx(0.0, abs=1e-12)

    def test_parallel_pair(self):
        a = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        # Two identical unit columns give eigenvalues 0 and 2.
        assert estimate_ric(a, 2).delta_s == pytest.approx(1.0)

    def test_full_order_at_least_one_when_wide(self):
        op = probe_operator(8, 4, 3)
        assert estimate_ric(op, 8).delta_s >= 1.0 - 1e-12

    def test_monotone_in_s(self):
        op = probe_operator(16, 8, 1)
        vals = [estimate_ric(op, s).delta_s for s in range(1, 5)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_sampled_is_lower_bound(self):
        op = probe_operator(16, 8, 2)
        exact = estimate_ric(op, 3)
        sampled = estimate_ric(op, 3, RicMethod.SAMPLED, seed=4, samples=200)
        assert sampled.delta_s <= exact.delta_s + 1e-12
        assert sampled.method is RicMethod.SAMPLED
        assert sampled.supports_checked == 200

    def test_exhaustive_count(self):
        est = estimate_ric(probe_operator(16, 8, 0), 2)
        assert est.supports_checked == 120
        assert (est.n, est.m, est.s) == (16, 8, 2)

    def test_size_limit(self):
        with pytest.raises(SizeError):
            estimate_ric(np.ones((4, 40)), 10)

    @pytest.mark.parametrize("s", [0, 11])
    def test_invalid_order(self, s):
        with pytest.raises(InvalidInputError):
            estimate_ric(np.ones((4, 10)), s)

    def test_non_matrix(self):
        with pytest.raises(InvalidInputError):
            estimate_ric(np.ones(4), 1)

    def test_bad_samples(self):
        with pytest.raises(InvalidInputError):
            estimate_ric(np.ones((4, 10)), 2, "sampled", samples=0)

    @given(st.integers(0, 2**31 - 1), st.integers(1, 3))
    def test_bounded_and_finite(self, seed, s):
        a = crandn(np.random.default_rng(seed), 5, 8)
        d = estimate_ric(a, s).delta_s
        assert np.isfinite(d) and 0 <= d <= s - 1 + 1e-9


class TestProbe:
    def test_probe_operator_deterministic(self):
        np.testing.assert_array_equal(probe_operator(16, 8, 5).matrix, probe_operator(16, 8, 5).matrix)
        assert not np.array_equal(probe_operator(16, 8, 5).matrix, probe_operator(16, 8, 6).matrix)

    def test_summary(self):
        summ = ric_concentration_probe(16, 8, 2, 5, first_seed=10)
        assert summ.seeds == (10, 11, 12, 13, 14)
        assert np.all(np.isfinite(summ.values))
        assert len(summ.exceedance) == len(summ.thresholds) == 4
        assert list(summ.exceedance) == sorted(summ.exceedance, reverse=True)

    def test_single_seed_zero_spread(self):
        assert ric_concentration_probe(16, 8, 2, 1).std == 0.0

    def test_more_rows_concentrate(self):
        low = ric_concentration_probe(16, 8, 2, 20).mean
        high = ric_concentration_probe(16, 12, 2, 20).mean
        assert high < low

    def test_no_seeds(self):
        with pytest.raises(InvalidInputError):
            ric_concentration_probe(16, 8, 2, 0)
