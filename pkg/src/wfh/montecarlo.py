"""Shot-by-shot simulation of the BPSK channel with a weak-field homodyne receiver.

Seeding: the master seed and an optional point index form a
``numpy.random.SeedSequence``; it is spawned once per set and each set draws
from its own Philox (counter-based) stream.  Within a set the draw order is
fixed: symbols, then transmitted/reflected counts for symbol 0, then for
symbol 1, then the coin flips for randomized outcomes.  Sets therefore give
the same numbers whether they run serially or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .decision import DecisionRule, RuleKind
from .receiver import BpskSource, ReceiverConfig, symbol_means

# Means below this use table inversion, above it transformed rejection.
INVERSION_MAX_MEAN = 10.0


@dataclass(frozen=True)
class McProtocol:
    set_size: int = 50_000
    n_sets: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.set_size < 1:
            raise ValueError("set_size must be positive")
        if self.n_sets < 2:
            raise ValueError("n_sets must be at least 2 to form an error bar")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McEstimate:
    """Mean over sets, the per-set values, and their sample standard deviation."""

    mean: float
    per_set: tuple[float, ...] = field(default=())
    error_bar: float = 0.0

    @classmethod
    def from_sets(cls, values) -> McEstimate:
        values = tuple(float(v) for v in values)
        if len(values) < 2:
            raise ValueError("need at least two sets for an error bar")
        arr = np.array(values)
        return cls(float(arr.mean()), values, float(arr.std(ddof=1)))


def _poisson_inversion(rng: np.random.Generator, mu: float, size: int) -> np.ndarray:
    """Inversion by search against the cumulative table of Poisson(mu)."""
    if mu == 0:
        return np.zeros(size, dtype=np.int64)
    n_max = int(mu + 40 * math.sqrt(mu) + 40)
    pmf = np.empty(n_max + 1)
    pmf[0] = math.exp(-mu)
    for n in range(1, n_max + 1):
        pmf[n] = pmf[n - 1] * mu / n
    cdf = np.cumsum(pmf)
    u = rng.random(size)
    return np.minimum(np.searchsorted(cdf, u, side="right"), n_max).astype(np.int64)


def _poisson_ptrs(rng: np.random.Generator, mu: float, size: int) -> np.ndarray:
    """Hormann's transformed rejection with squeeze (PTRS), exact for mu >= 10."""
    slam = math.sqrt(mu)
    loglam = math.log(mu)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2)

    out = np.empty(size, dtype=np.int64)
    pending = np.arange(size)
    while pending.size:
        n = pending.size
        u = rng.random(n) - 0.5
        v = rng.random(n)
        us = 0.5 - np.abs(u)
        k = np.floor((2 * a / us + b) * u + mu + 0.43)

        quick = (us >= 0.07) & (v <= v_r)
        maybe = ~quick & (k >= 0) & ~((us < 0.013) & (v > us))
        with np.errstate(divide="ignore", invalid="ignore"):
            kk = np.where(maybe, k, 0.0)
            lhs = np.log(v) + math.log(inv_alpha) - np.log(a / (us * us) + b)
            rhs = -mu + kk * loglam - gammaln(kk + 1)
        accept = quick | (maybe & (lhs <= rhs))
        out[pending[accept]] = k[accept].astype(np.int64)
        pending = pending[~accept]
    return out


def sample_poisson(rng: np.random.Generator, mu: float, size: int) -> np.ndarray:
    if mu < 0:
        raise ValueError("Poisson mean must be nonnegative")
    if mu < INVERSION_MAX_MEAN:
        return _poisson_inversion(rng, mu, size)
    return _poisson_ptrs(rng, mu, size)


def sample_shots(
    source: BpskSource, cfg: ReceiverConfig, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n (symbol, photon-number difference) pairs."""
    k = (rng.random(n) >= source.q0).astype(np.int8)
    delta = np.empty(n, dtype=np.int64)
    for sym in (0, 1):
        idx = np.flatnonzero(k == sym)
        mu = symbol_means(source, cfg, sym)
        counts_t = sample_poisson(rng, mu.mu_t, idx.size)
        counts_r = sample_poisson(rng, mu.mu_r, idx.size)
        delta[idx] = counts_t - counts_r
    return k, delta


def sample_shot(source: BpskSource, cfg: ReceiverConfig, rng: np.random.Generator) -> tuple[int, int]:
    k, delta = sample_shots(source, cfg, 1, rng)
    return int(k[0]), int(delta[0])


def decide(rule: DecisionRule, delta: np.ndarray, q0: float, rng: np.random.Generator) -> np.ndarray:
    th, randomize = rule.boundary()
    j = (delta > th).astype(np.int8)
    if randomize:
        edge = np.flatnonzero(delta == th + 1)
        j[edge] = (rng.random(edge.size) >= q0).astype(np.int8)
    return j


def joint_counts(k: np.ndarray, j: np.ndarray) -> np.ndarray:
    """2x2 table, counts[j, k]."""
    return np.bincount(2 * j.astype(np.int64) + k, minlength=4).reshape(2, 2)


def plugin_figures(counts: np.ndarray) -> tuple[float, float]:
    """Empirical error rate and plug-in mutual information (bits) from counts[j, k].

    No bias correction: for a null channel the plug-in MI is biased upward by
    about log2(e) / (2 N).
    """
    total = counts.sum()
    p_err = (counts[1, 0] + counts[0, 1]) / total
    joint = counts / total
    pk = joint.sum(axis=0)
    pj = joint.sum(axis=1)
    mi = 0.0
    for jj in (0, 1):
        for kk in (0, 1):
            if joint[jj, kk] > 0:
                mi += joint[jj, kk] * math.log2(joint[jj, kk] / (pj[jj] * pk[kk]))
    return float(p_err), max(mi, 0.0)


def set_streams(protocol: McProtocol, point_index: int | None = None) -> list[np.random.Generator]:
    key = () if point_index is None else (int(point_index),)
    root = np.random.SeedSequence(protocol.seed, spawn_key=key)
    return [np.random.Generator(np.random.Philox(s)) for s in root.spawn(protocol.n_sets)]


def _run_set(source, cfg, rule, size, rng) -> tuple[float, float]:
    k, delta = sample_shots(source, cfg, size, rng)
    j = decide(rule, delta, source.q0, rng)
    return plugin_figures(joint_counts(k, j))


def run_protocol(
    source: BpskSource,
    cfg: ReceiverConfig,
    rule: DecisionRule,
    protocol: McProtocol = McProtocol(),
    point_index: int | None = None,
    workers: int = 1,
) -> tuple[McEstimate, McEstimate]:
    """Monte Carlo P_err and MI estimates over ``protocol.n_sets`` independent sets."""
    if rule.kind is RuleKind.SIGN_RANDOMIZED and not cfg.balanced:
        raise ValueError(f"the randomized sign rule requires tau = 0.5, got tau={cfg.tau}")
    streams = set_streams(protocol, point_index)
    jobs = [(source, cfg, rule, protocol.set_size, rng) for rng in streams]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _run_set(*a), jobs))
    else:
        results = [_run_set(*a) for a in jobs]
    p_err = McEstimate.from_sets(r[0] for r in results)
    mi = McEstimate.from_sets(r[1] for r in results)
    return p_err, mi
