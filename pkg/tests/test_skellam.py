import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfh.skellam import (
    SkellamParams,
    Tail,
    skellam_log_pmf,
    skellam_oracle_pmf,
    skellam_pmf,
    skellam_tail,
)

means = st.floats(min_value=0.0, max_value=50.0, allow_nan=False)
positive_means = st.floats(min_value=0.01, max_value=50.0, allow_nan=False)


def mp_skellam(delta, mu_t, mu_r, dps=50):
    with mp.workdps(dps):
        mt, mr = mp.mpf(mu_t), mp.mpf(mu_r)
        return mp.exp(-mt - mr) * (mt / mr) ** (mp.mpf(delta) / 2) * mp.besseli(abs(delta), 2 * mp.sqrt(mt * mr))


class TestPmf:
    def test_zero_means(self):
        assert skellam_pmf(0, SkellamParams(0.0, 0.0)) == 1.0
        assert skellam_pmf(3, SkellamParams(0.0, 0.0)) == 0.0

    def test_reflected_mean_zero_is_poisson(self):
        assert skellam_pmf(2, SkellamParams(1.0, 0.0)) == pytest.approx(math.exp(-1) / 2, rel=1e-15)

    def test_transmitted_mean_zero_is_mirrored_poisson(self):
        assert skellam_pmf(-3, SkellamParams(0.0, 2.0)) == pytest.approx(math.exp(-2) * 8 / 6, rel=1e-15)

    def test_against_oracle_value(self):
        # frozen from skellam_oracle_pmf, cross-checked with mpmath
        assert skellam_pmf(1, SkellamParams(2.0, 1.0)) == pytest.approx(0.238463438486297, rel=1e-12)

    def test_direct_substitution(self):
        expected = math.log(math.exp(-2) * float(mp.besseli(0, 2)))
        assert skellam_log_pmf(0, SkellamParams(1.0, 1.0)) == pytest.approx(expected, rel=1e-14)

    def test_large_means_stay_finite(self):
        value = skellam_log_pmf(0, SkellamParams(400.0, 400.0))
        assert value == pytest.approx(-4.2610880492549812175, rel=1e-12)

    def test_linear_pmf_underflow_is_finite_in_log_space(self):
        # exp(-1500) underflows, the log does not
        p = SkellamParams(0.01, 0.01)
        assert skellam_pmf(300, p) == 0.0
        lp = skellam_log_pmf(300, p)
        assert math.isfinite(lp)
        expected = float(mp.log(mp_skellam(300, 0.01, 0.01)))
        assert lp == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("delta", [60, 80, 100, -100])
    def test_series_branch_for_high_order(self, delta):
        # large order, small argument: scaled Bessel value underflows
        p = SkellamParams(0.01, 0.02)
        expected = float(mp.log(mp_skellam(delta, 0.01, 0.02)))
        assert skellam_log_pmf(delta, p) == pytest.approx(expected, rel=1e-12)

    def test_homodyne_scale(self):
        p = SkellamParams(10_000.0 + 140.0, 10_000.0 - 140.0)
        for d in (0, 280, 500, -100):
            assert skellam_pmf(d, p) == pytest.approx(float(mp_skellam(d, p.mu_t, p.mu_r)), rel=1e-10)

    def test_impossible_event(self):
        assert skellam_log_pmf(-1, SkellamParams(1.0, 0.0)) == -math.inf
        assert skellam_pmf(-1, SkellamParams(1.0, 0.0)) == 0.0
        assert skellam_log_pmf(1, SkellamParams(0.0, 1.0)) == -math.inf

    def test_array_input(self):
        p = SkellamParams(2.0, 1.0)
        d = np.arange(-5, 6)
        vec = skellam_pmf(d, p)
        assert vec.shape == d.shape
        assert vec[6] == pytest.approx(skellam_pmf(1, p), rel=1e-15)

    @pytest.mark.parametrize("mu_t,mu_r", [(-1.0, 1.0), (1.0, -0.1), (math.nan, 1.0), (math.inf, 1.0)])
    def test_domain_errors(self, mu_t, mu_r):
        with pytest.raises(ValueError):
            SkellamParams(mu_t, mu_r)

    def test_non_integer_delta_rejected(self):
        with pytest.raises(ValueError):
            skellam_pmf(0.5, SkellamParams(1.0, 1.0))


class TestOracle:
    def test_trivial(self):
        assert skellam_oracle_pmf(0, SkellamParams(0.0, 0.0)) == 1.0

    def test_symmetry(self):
        a = skellam_oracle_pmf(3, SkellamParams(5.0, 2.0))
        b = skellam_oracle_pmf(-3, SkellamParams(2.0, 5.0))
        assert a == pytest.approx(b, rel=1e-14)

    def test_grid_matches_pmf(self):
        p = SkellamParams(2.37, 10.88)
        d = np.arange(-60, 61)
        slow = np.array([skellam_oracle_pmf(int(x), p) for x in d])
        np.testing.assert_allclose(skellam_pmf(d, p), slow, rtol=1e-10, atol=0)

    def test_refuses_large_means(self):
        with pytest.raises(ValueError, match="oracle"):
            skellam_oracle_pmf(0, SkellamParams(51.0, 1.0))


class TestTail:
    def test_normalization(self):
        p = SkellamParams(3.0, 7.0)
        assert skellam_tail(Tail.BELOW, 10_000, p) == pytest.approx(1.0, abs=1e-10)

    def test_symmetric_upper_tail(self):
        p = SkellamParams(4.2, 4.2)
        s0 = skellam_pmf(0, p)
        assert skellam_tail(Tail.ABOVE, 0, p) == pytest.approx((1 + s0) / 2, abs=1e-12)

    def test_lower_tail_against_oracle(self):
        # sum over Delta in [-60, -1] of the brute-force pmf
        assert skellam_tail(Tail.BELOW, -1, SkellamParams(2.0, 1.0)) == pytest.approx(0.18258477493038808, rel=1e-11)

    def test_bounds_outside_support(self):
        p = SkellamParams(1.0, 0.0)
        assert skellam_tail(Tail.BELOW, -1, p) == 0.0
        assert skellam_tail(Tail.ABOVE, -5, p) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(mu_t=means, mu_r=means, bound=st.integers(-80, 80))
    def test_complementary(self, mu_t, mu_r, bound):
        p = SkellamParams(mu_t, mu_r)
        total = skellam_tail(Tail.BELOW, bound, p) + skellam_tail(Tail.ABOVE, bound + 1, p)
        assert total == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(a=means, b=means, delta=st.integers(-60, 60))
def test_symmetry_property(a, b, delta):
    x = skellam_pmf(delta, SkellamParams(a, b))
    y = skellam_pmf(-delta, SkellamParams(b, a))
    assert x == pytest.approx(y, rel=1e-12, abs=0)


@settings(max_examples=40, deadline=None)
@given(a=means, b=means)
def test_normalization_and_moments_property(a, b):
    k = math.ceil(abs(a - b) + 12 * math.sqrt(a + b) + 12)
    d = np.arange(-k, k + 1)
    w = skellam_pmf(d, SkellamParams(a, b))
    assert math.fsum(w) >= 1 - 1e-10
    mean = math.fsum(d * w)
    assert mean == pytest.approx(a - b, abs=1e-8)
    assert math.fsum((d - mean) ** 2 * w) == pytest.approx(a + b, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(a=positive_means, b=positive_means, delta=st.integers(-60, 60))
def test_log_pmf_consistent_with_pmf(a, b, delta):
    p = SkellamParams(a, b)
    lin = skellam_pmf(delta, p)
    if lin > 1e-300:
        assert math.exp(skellam_log_pmf(delta, p)) == pytest.approx(lin, rel=1e-12)
