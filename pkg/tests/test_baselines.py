import math

import numpy as np
import pytest
from scipy import integrate, stats

from wfh.baselines import baselines, helstrom_bound, homodyne_limit
from wfh.decision import DecisionRule, figures_of_merit
from wfh.receiver import BpskSource, ReceiverConfig


def test_helstrom_trivial():
    assert helstrom_bound(0.0, 0.5) == pytest.approx(0.5)
    assert helstrom_bound(1.0, 1.0) == 0.0
    assert helstrom_bound(1.0, 0.0) == 0.0


def test_helstrom_fig4_energy():
    expected = 0.5 * (1 - math.sqrt(1 - math.exp(-7.88)))
    assert helstrom_bound(1.97, 0.5) == pytest.approx(expected, rel=1e-10)
    assert helstrom_bound(1.97, 0.5) == pytest.approx(9.4e-5, rel=0.01)


def test_homodyne_equal_priors():
    assert homodyne_limit(0.0, 0.5) == 0.5
    assert homodyne_limit(1.97, 0.5) == pytest.approx(0.5 * math.erfc(math.sqrt(3.94)), rel=1e-14)


@pytest.mark.parametrize("alpha_sq,q0", [(0.5, 0.7), (1.97, 0.9), (2.37, 0.6), (0.1, 0.3)])
def test_homodyne_unequal_priors_by_quadrature(alpha_sq, q0):
    """Integrate min(q0 f0, q1 f1) over the quadrature outcome."""
    a, sd = math.sqrt(alpha_sq), 0.5
    f = lambda x: min(q0 * stats.norm.pdf(x, -a, sd), (1 - q0) * stats.norm.pdf(x, a, sd))
    value, _ = integrate.quad(f, -10, 10, points=[0.0], limit=200, epsabs=1e-14)
    assert homodyne_limit(alpha_sq, q0) == pytest.approx(value, rel=1e-8)


def test_homodyne_degenerate_priors():
    assert homodyne_limit(1.0, 1.0) == 0.0
    assert homodyne_limit(0.0, 0.8) == pytest.approx(0.2)


def test_domain():
    with pytest.raises(ValueError):
        helstrom_bound(-1.0)
    with pytest.raises(ValueError):
        homodyne_limit(-1.0)


def test_monotone_in_energy():
    a = np.linspace(0, 5, 41)
    h = [helstrom_bound(x) for x in a]
    g = [homodyne_limit(x) for x in a]
    assert np.all(np.diff(h) <= 0) and np.all(np.diff(g) <= 0)


def test_point_bundle():
    p = baselines(1.0, 0.5)
    assert p.p_err_helstrom <= p.p_err_homodyne_limit


@pytest.mark.parametrize("alpha_sq", [0.1, 0.5, 1.0, 2.0, 3.5, 5.0])
@pytest.mark.parametrize("z_sq", [1.0, 5.0, 20.0])
def test_ordering_against_wfh(alpha_sq, z_sq):
    wfh = figures_of_merit(DecisionRule.sign_randomized(), BpskSource(alpha_sq), ReceiverConfig(z_sq, 0.5, 1.0)).p_err
    assert helstrom_bound(alpha_sq) <= homodyne_limit(alpha_sq) <= wfh
