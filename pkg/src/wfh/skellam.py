"""Skellam (Poisson-difference) distribution in log space.

The pmf of the photon-number difference ``n - m`` of two independent Poisson
counts with means ``mu_t`` and ``mu_r`` is evaluated through the exponentially
scaled modified Bessel function, so that ``I_delta(2 sqrt(mu_t mu_r))`` never
overflows.  A short power series in log space takes over where the scaled
Bessel value underflows (large order, small argument).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln, ive, logsumexp

# Below this the scaled Bessel value is treated as underflowed and the series is used.
_IVE_UNDERFLOW = 1e-280
_SERIES_TERMS = 64
# Half-width of the truncated support, in standard deviations plus a constant.
GRID_SIGMAS = 12.0
GRID_PAD = 12
# Largest mean accepted by the brute-force convolution oracle.
ORACLE_MAX_MEAN = 50.0


class Tail(Enum):
    BELOW = "below"
    ABOVE = "above"


@dataclass(frozen=True)
class SkellamParams:
    """Poisson means at the transmitted and reflected detector ports."""

    mu_t: float
    mu_r: float

    def __post_init__(self):
        for name in ("mu_t", "mu_r"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")

    @property
    def mean(self) -> float:
        return self.mu_t - self.mu_r

    @property
    def variance(self) -> float:
        return self.mu_t + self.mu_r

    def support(self) -> tuple[int, int]:
        """Integer range holding all but a negligible part of the mass."""
        half = GRID_SIGMAS * math.sqrt(self.variance) + GRID_PAD
        lo = math.floor(self.mean - half)
        hi = math.ceil(self.mean + half)
        if self.mu_r == 0:
            lo = max(lo, 0)
        if self.mu_t == 0:
            hi = min(hi, 0)
        return lo, hi


def _log_bessel_i_series(order: np.ndarray, log_half_x: float) -> np.ndarray:
    """log I_order(x) from the ascending series; accurate when x**2 / 4 << order."""
    k = np.arange(_SERIES_TERMS)[:, None]
    terms = (2 * k + order[None, :]) * log_half_x - gammaln(k + 1) - gammaln(k + order[None, :] + 1)
    return logsumexp(terms, axis=0)


def _log_ive(order: np.ndarray, x: float, log_half_x: float) -> np.ndarray:
    """log(I_order(x) e^{-x}) for nonnegative integer orders and x > 0.

    ``log_half_x`` is passed separately because x itself may underflow.
    """
    scaled = ive(order, x)
    out = np.empty(order.shape, dtype=float)
    ok = scaled > _IVE_UNDERFLOW
    out[ok] = np.log(scaled[ok])
    if not ok.all():
        out[~ok] = _log_bessel_i_series(order[~ok].astype(float), log_half_x) - x
    return out


def _log_poisson(n: np.ndarray, mu: float) -> np.ndarray:
    out = np.full(n.shape, -np.inf)
    ok = n >= 0
    if mu == 0:
        out[n == 0] = 0.0
        return out
    nn = n[ok].astype(float)
    out[ok] = nn * math.log(mu) - mu - gammaln(nn + 1)
    return out


def skellam_log_pmf(delta, params: SkellamParams):
    """Natural log of S_delta(mu_t, mu_r).

    Impossible outcomes (a negative difference with ``mu_r == 0``, or a
    positive one with ``mu_t == 0``) give ``-inf``.  Accepts a scalar or an
    integer array for ``delta`` and returns the same shape.
    """
    d = np.asarray(delta)
    if d.dtype.kind not in "iu":
        if not np.all(np.mod(d, 1) == 0):
            raise ValueError("delta must be integer valued")
        d = d.astype(np.int64)
    scalar = d.ndim == 0
    d = np.atleast_1d(d).astype(np.int64)

    mu_t, mu_r = params.mu_t, params.mu_r
    if mu_r == 0:
        out = _log_poisson(d, mu_t)
    elif mu_t == 0:
        out = _log_poisson(-d, mu_r)
    else:
        x = 2.0 * math.sqrt(mu_t) * math.sqrt(mu_r)
        log_half_x = 0.5 * (math.log(mu_t) + math.log(mu_r))
        # -(mu_t + mu_r) + x == -(sqrt(mu_t) - sqrt(mu_r))**2, without cancellation
        base = -((math.sqrt(mu_t) - math.sqrt(mu_r)) ** 2)
        half_log_ratio = 0.5 * (math.log(mu_t) - math.log(mu_r))
        out = base + d * half_log_ratio + _log_ive(np.abs(d), x, log_half_x)
    return float(out[0]) if scalar else out


def skellam_pmf(delta, params: SkellamParams):
    """S_delta(mu_t, mu_r); scalar or array in, same shape out."""
    return np.exp(skellam_log_pmf(delta, params))


def skellam_tail(sign: Tail, bound: int, params: SkellamParams) -> float:
    """P(Delta <= bound) for ``Tail.BELOW`` or P(Delta >= bound) for ``Tail.ABOVE``."""
    lo, hi = params.support()
    if sign is Tail.BELOW:
        lo_, hi_ = lo, min(bound, hi)
    elif sign is Tail.ABOVE:
        lo_, hi_ = max(bound, lo), hi
    else:
        raise TypeError(f"sign must be a Tail, got {sign!r}")
    if hi_ < lo_:
        return 0.0
    return math.fsum(skellam_pmf(np.arange(lo_, hi_ + 1), params))


def skellam_oracle_pmf(delta: int, params: SkellamParams) -> float:
    """Brute-force S_delta as sum_m Pois(mu_t)(m + delta) * Pois(mu_r)(m).

    Independent of the Bessel route; meant for verification only and refuses
    means above ``ORACLE_MAX_MEAN``.
    """
    mu_t, mu_r = params.mu_t, params.mu_r
    if mu_t > ORACLE_MAX_MEAN or mu_r > ORACLE_MAX_MEAN:
        raise ValueError(f"oracle is limited to means <= {ORACLE_MAX_MEAN}")
    delta = int(delta)

    def log_pois(n: int, mu: float) -> float:
        if mu == 0:
            return 0.0 if n == 0 else -math.inf
        return n * math.log(mu) - mu - math.lgamma(n + 1)

    terms = []
    m = max(0, -delta)
    peak = -math.inf
    while True:
        t = math.exp(log_pois(m + delta, mu_t) + log_pois(m, mu_r))
        terms.append(t)
        peak = max(peak, t)
        # t(m+1)/t(m) = mu_t mu_r / ((m+1)(m+delta+1)): unimodal in m
        past_mode = (m + 1) * (m + delta + 1) > mu_t * mu_r
        if past_mode and (t == 0.0 or t < 1e-18 * peak):
            break
        m += 1
    return math.fsum(terms)
