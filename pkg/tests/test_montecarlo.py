import math

import numpy as np
import pytest
from scipy import stats

from wfh.decision import DecisionRule, figures_of_merit, map_threshold
from wfh.montecarlo import (
    McEstimate,
    McProtocol,
    decide,
    joint_counts,
    plugin_figures,
    run_protocol,
    sample_poisson,
    sample_shot,
    sample_shots,
)
from wfh.receiver import BpskSource, ReceiverConfig, symbol_means
from wfh.skellam import skellam_pmf

SIGN = DecisionRule.sign_randomized()


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


class TestPoisson:
    @pytest.mark.parametrize("mu", [0.3, 4.0, 9.99, 10.0, 11.36, 47.0, 2500.0])
    def test_goodness_of_fit(self, mu):
        x = sample_poisson(rng(11), mu, 400_000)
        n = np.arange(x.max() + 1)
        expected = stats.poisson.pmf(n, mu) * x.size
        observed = np.bincount(x, minlength=n.size)
        keep = expected > 20
        # lump the sparse tails into one bin so every cell has enough mass
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], x.size - expected[keep].sum())
        assert stats.chisquare(obs, exp).pvalue > 1e-4

    def test_zero_mean(self):
        assert np.all(sample_poisson(rng(), 0.0, 100) == 0)

    def test_negative_mean(self):
        with pytest.raises(ValueError):
            sample_poisson(rng(), -1.0, 10)


class TestShots:
    def test_null_means(self):
        k, d = sample_shots(BpskSource(0.0), ReceiverConfig(0.0), 1000, rng())
        assert np.all(d == 0)

    def test_single_shot(self):
        k, d = sample_shot(BpskSource(2.0, 0.5), ReceiverConfig(3.0), rng(3))
        assert k in (0, 1)
        assert isinstance(d, int)

    def test_symbol_frequency(self):
        k, _ = sample_shots(BpskSource(2.0, 0.7), ReceiverConfig(3.0), 100_000, rng(4))
        assert abs(np.mean(k == 0) - 0.7) < 4 * math.sqrt(0.21 / 100_000)

    @pytest.mark.parametrize("tau,xi", [(0.5, 0.91), (0.545, 0.86), (0.3, 1.0)])
    def test_conditional_moments(self, tau, xi):
        s, c = BpskSource(2.37, 0.5), ReceiverConfig(10.88, tau, xi)
        k, d = sample_shots(s, c, 50_000, rng(5))
        for sym in (0, 1):
            mu = symbol_means(s, c, sym)
            sel = d[k == sym]
            sigma_mean = math.sqrt(mu.variance / sel.size)
            assert abs(sel.mean() - mu.mean) < 4 * sigma_mean
            # variance of the sample variance for a Skellam law: (kurtosis term) ~ 2 v^2 + v
            sigma_var = math.sqrt((2 * mu.variance**2 + mu.variance) / sel.size)
            assert abs(sel.var(ddof=1) - mu.variance) < 4 * sigma_var

    def test_pmf_convergence(self):
        s, c = BpskSource(1.97, 0.0), ReceiverConfig(10.0, 0.5, 0.91)
        _, d = sample_shots(s, c, 1_000_000, rng(6))
        mu = symbol_means(s, c, 1)
        lo, hi = d.min(), d.max()
        grid = np.arange(lo, hi + 1)
        emp = np.bincount(d - lo) / d.size
        tv = 0.5 * (np.abs(emp - skellam_pmf(grid, mu)).sum() + (1 - skellam_pmf(grid, mu).sum()))
        assert tv < 5e-3


class TestDecide:
    def test_threshold(self):
        d = np.array([-3, -1, 0, 1, 2])
        j = decide(DecisionRule.fixed_threshold(0), d, 0.5, rng())
        assert j.tolist() == [0, 0, 0, 1, 1]

    def test_randomized_edge(self):
        d = np.zeros(100_000, dtype=np.int64)
        j = decide(SIGN, d, 0.8, rng(2))
        assert abs(np.mean(j == 0) - 0.8) < 4 * math.sqrt(0.16 / d.size)

    def test_joint_counts_layout(self):
        k = np.array([0, 0, 1, 1, 1])
        j = np.array([0, 1, 1, 1, 0])
        counts = joint_counts(k, j)
        assert counts.tolist() == [[1, 1], [1, 2]]

    def test_plugin_figures(self):
        counts = np.array([[45, 5], [5, 45]])
        p_err, mi = plugin_figures(counts)
        assert p_err == pytest.approx(0.1)
        h = -(0.9 * math.log2(0.9) + 0.1 * math.log2(0.1))
        assert mi == pytest.approx(1 - h, abs=1e-14)


class TestProtocol:
    def test_defaults(self):
        p = McProtocol()
        assert (p.set_size, p.n_sets) == (50_000, 3)

    @pytest.mark.parametrize("kwargs", [dict(set_size=0), dict(n_sets=1), dict(seed=-1), dict(seed=2**64)])
    def test_protocol_domain(self, kwargs):
        with pytest.raises(ValueError):
            McProtocol(**kwargs)

    def test_estimate(self):
        est = McEstimate.from_sets([1.0, 2.0, 3.0])
        assert est.mean == pytest.approx(2.0, abs=1e-12)
        assert est.error_bar == pytest.approx(1.0)
        with pytest.raises(ValueError):
            McEstimate.from_sets([1.0])

    def test_null_channel(self):
        n = 50_000
        pe, mi = run_protocol(BpskSource(0.0, 0.5), ReceiverConfig(10.0), SIGN, McProtocol(n, 3, seed=9))
        assert abs(pe.mean - 0.5) < 3 * math.sqrt(0.25 / (3 * n))
        # plug-in bias bound for an independent 2x2 table, with a 3-sigma allowance
        assert mi.mean < 3 * math.log2(math.e) * 3 / (2 * n)

    def test_fig4_point(self):
        s, c = BpskSource(1.97, 0.5), ReceiverConfig(10.0, 0.5, 0.91)
        exact = figures_of_merit(SIGN, s, c).p_err
        pe, _ = run_protocol(s, c, SIGN, McProtocol(seed=1))
        assert abs(pe.mean - exact) < 3 * math.sqrt(exact * (1 - exact) / 150_000)

    def test_determinism(self):
        s, c = BpskSource(2.37, 0.7), ReceiverConfig(10.88, 0.545, 0.86)
        rule = map_threshold(s, c)
        a = run_protocol(s, c, rule, McProtocol(20_000, 3, seed=42))
        b = run_protocol(s, c, rule, McProtocol(20_000, 3, seed=42))
        par = run_protocol(s, c, rule, McProtocol(20_000, 3, seed=42), workers=3)
        assert a == b == par
        other = run_protocol(s, c, rule, McProtocol(20_000, 3, seed=43))
        assert other != a

    def test_point_index_changes_stream(self):
        s, c = BpskSource(2.0), ReceiverConfig(5.0)
        a = run_protocol(s, c, SIGN, McProtocol(5_000, 2, seed=1), point_index=0)
        b = run_protocol(s, c, SIGN, McProtocol(5_000, 2, seed=1), point_index=1)
        assert a != b

    def test_sign_rule_rejected_off_balance(self):
        with pytest.raises(ValueError, match="tau"):
            run_protocol(BpskSource(1.0), ReceiverConfig(5.0, 0.545), SIGN, McProtocol(100, 2))
