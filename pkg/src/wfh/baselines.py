"""Reference error probabilities for discriminating |alpha> from |-alpha>."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfc

# Quadrature x = (a + a^dagger) / 2 has vacuum variance 1/4.
_QUADRATURE_SD = 0.5


@dataclass(frozen=True)
class BaselinePoint:
    p_err_helstrom: float
    p_err_homodyne_limit: float


def helstrom_bound(alpha_sq: float, q0: float = 0.5) -> float:
    """Minimum error over all quantum measurements; overlap |<-alpha|alpha>|^2 = e^{-4 alpha^2}."""
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be nonnegative")
    overlap = math.exp(-4.0 * alpha_sq)
    disc = 1.0 - 4.0 * q0 * (1.0 - q0) * overlap
    # 1 - sqrt(disc) loses digits when disc is close to 1
    return 0.5 * (1.0 - disc) / (1.0 + math.sqrt(max(disc, 0.0)))


def _gauss_tail(x: float) -> float:
    return 0.5 * erfc(x / math.sqrt(2.0))


def homodyne_limit(alpha_sq: float, q0: float = 0.5) -> float:
    """Ideal homodyne error with the MAP threshold on the Gaussian quadrature.

    Equal priors reduce to 0.5 * erfc(sqrt(2) * alpha).
    """
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be nonnegative")
    q1 = 1.0 - q0
    if q0 in (0.0, 1.0):
        return 0.0
    alpha = math.sqrt(alpha_sq)
    if alpha == 0.0:
        return min(q0, q1)
    sd = _QUADRATURE_SD
    # Equal weighted Gaussian densities: decide symbol 0 (mean -alpha) below x_th.
    x_th = sd * sd * math.log(q0 / q1) / (2.0 * alpha)
    return q0 * _gauss_tail((x_th + alpha) / sd) + q1 * _gauss_tail((alpha - x_th) / sd)


def baselines(alpha_sq: float, q0: float = 0.5) -> BaselinePoint:
    return BaselinePoint(helstrom_bound(alpha_sq, q0), homodyne_limit(alpha_sq, q0))
