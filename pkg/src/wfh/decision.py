"""Decision rules on the photon-number difference and the resulting figures of merit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .receiver import BpskSource, ReceiverConfig, symbol_means
from .skellam import Tail, skellam_log_pmf, skellam_pmf, skellam_tail

# Weighted log-likelihoods closer than this (a relative gap in the likelihoods) are a tie.
TIE_RTOL = 1e-12


class RuleKind(Enum):
    SIGN_RANDOMIZED = "sign"
    MAP_THRESHOLD = "map"


class DegenerateChannelError(ValueError):
    """The two symbols produce the same outcome distribution."""


class ThresholdConsistencyError(RuntimeError):
    """MAP decisions on the scanned grid are not a single threshold."""


@dataclass(frozen=True)
class DecisionRule:
    """Infer symbol 0 for Delta <= delta_th, symbol 1 above.

    For SIGN_RANDOMIZED ``delta_th`` is None; the rule is "negative -> 0,
    positive -> 1, zero -> draw symbol k with probability q_k".  A threshold
    rule with ``randomize_next`` set treats Delta = delta_th + 1 the same way,
    which is how exact MAP ties at equal priors are resolved.
    """

    kind: RuleKind
    delta_th: int | None = None
    randomize_next: bool = False

    def __post_init__(self):
        if (self.kind is RuleKind.MAP_THRESHOLD) != (self.delta_th is not None):
            raise ValueError("delta_th is required for MAP_THRESHOLD and forbidden otherwise")

    @classmethod
    def sign_randomized(cls) -> DecisionRule:
        return cls(RuleKind.SIGN_RANDOMIZED)

    @classmethod
    def fixed_threshold(cls, delta_th: int) -> DecisionRule:
        """Threshold rule held at a given value instead of the MAP optimum."""
        return cls(RuleKind.MAP_THRESHOLD, int(delta_th))

    def boundary(self) -> tuple[int, bool]:
        """(last Delta deciding 0, whether the next outcome is randomized)."""
        if self.kind is RuleKind.SIGN_RANDOMIZED:
            return -1, True
        return self.delta_th, self.randomize_next


@dataclass(frozen=True)
class ChannelMatrix:
    """p[j, k] = probability of deciding j when symbol k was sent."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (2, 2):
            raise ValueError("channel matrix must be 2x2")
        if np.any(p < -1e-10) or np.any(p > 1 + 1e-10):
            raise ValueError("channel matrix entries must be probabilities")
        if not np.allclose(p.sum(axis=0), 1.0, rtol=0, atol=1e-10):
            raise ValueError(f"channel matrix columns must sum to 1, got {p.sum(axis=0)}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __getitem__(self, jk):
        return self.p[jk]


@dataclass(frozen=True)
class FiguresOfMerit:
    p_err: float
    mi_bits: float


def binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -q * math.log2(q) - (1 - q) * math.log2(1 - q)


def decision_grid(source: BpskSource, cfg: ReceiverConfig) -> np.ndarray:
    """Union of both symbols' truncated supports."""
    lo0, hi0 = symbol_means(source, cfg, 0).support()
    lo1, hi1 = symbol_means(source, cfg, 1).support()
    return np.arange(min(lo0, lo1), max(hi0, hi1) + 1)


def _weighted_log_likelihoods(source: BpskSource, cfg: ReceiverConfig, deltas) -> tuple:
    with np.errstate(divide="ignore"):
        out = []
        for k in (0, 1):
            q = source.prior(k)
            logq = math.log(q) if q > 0 else -math.inf
            out.append(logq + skellam_log_pmf(deltas, symbol_means(source, cfg, k)))
    return tuple(out)


def map_posterior(k: int, delta: int, source: BpskSource, cfg: ReceiverConfig) -> float:
    """Posterior probability that symbol k was sent given the outcome delta."""
    w0, w1 = _weighted_log_likelihoods(source, cfg, int(delta))
    if w0 == -math.inf and w1 == -math.inf:
        raise ValueError(f"outcome {delta} is impossible under both symbols")
    norm = np.logaddexp(w0, w1)
    return float(math.exp((w0 if k == 0 else w1) - norm))


def map_threshold(source: BpskSource, cfg: ReceiverConfig) -> DecisionRule:
    """Resolve the MAP rule into an integer threshold by scanning the outcome grid.

    Symbol 0 is inferred where q0 S(mu(phi_0)) > q1 S(mu(phi_1)).  An exact tie
    goes to the larger prior, or at q0 = 1/2 is randomized.  Raises
    ThresholdConsistencyError if the decisions are not a single threshold.
    """
    if not 0.0 < source.q0 < 1.0:
        raise ValueError(f"MAP threshold needs q0 in (0, 1), got {source.q0!r}")
    if symbol_means(source, cfg, 0) == symbol_means(source, cfg, 1):
        raise DegenerateChannelError("both symbols give the same port means")

    grid = decision_grid(source, cfg)
    w0, w1 = _weighted_log_likelihoods(source, cfg, grid)
    tie = np.isclose(w0, w1, rtol=0, atol=TIE_RTOL) & np.isfinite(w0)
    decide0 = (w0 > w1) & ~tie
    if source.q0 > 0.5:
        decide0 |= tie
    randomized = tie if source.q0 == 0.5 else np.zeros_like(tie)

    # Expected shape along the grid: 0...0, at most one randomized tie, then 1...1.
    n0 = int(np.argmin(decide0)) if not decide0.all() else grid.size
    rest = slice(n0 + 1 if n0 < grid.size and randomized[n0] else n0, None)
    if decide0[n0:].any() or randomized[rest].any():
        bad = grid[n0:][decide0[n0:]]
        raise ThresholdConsistencyError(
            f"MAP decisions are not a threshold: symbol 0 preferred again at Delta={bad[:5].tolist()}"
        )
    delta_th = int(grid[0]) - 1 + n0
    return DecisionRule(
        RuleKind.MAP_THRESHOLD, delta_th, bool(n0 < grid.size and randomized[n0])
    )


def channel_matrix(rule: DecisionRule, source: BpskSource, cfg: ReceiverConfig) -> ChannelMatrix:
    if rule.kind is RuleKind.SIGN_RANDOMIZED and not cfg.balanced:
        raise ValueError(f"the randomized sign rule requires tau = 0.5, got tau={cfg.tau}")
    th, randomize = rule.boundary()
    p = np.empty((2, 2))
    for k in (0, 1):
        mu = symbol_means(source, cfg, k)
        below = skellam_tail(Tail.BELOW, th, mu)
        if randomize:
            edge = float(skellam_pmf(th + 1, mu))
            above = skellam_tail(Tail.ABOVE, th + 2, mu)
            p[0, k] = below + source.q0 * edge
            p[1, k] = above + source.q1 * edge
        else:
            p[0, k] = below
            p[1, k] = skellam_tail(Tail.ABOVE, th + 1, mu)
    return ChannelMatrix(p)


def error_probability(matrix: ChannelMatrix, q0: float) -> float:
    return float(q0 * matrix[1, 0] + (1.0 - q0) * matrix[0, 1])


def mutual_information(matrix: ChannelMatrix, q0: float) -> float:
    """I(K; J) in bits; 0 log 0 terms are dropped."""
    q = np.array([q0, 1.0 - q0])
    p = matrix.p
    pj = p @ q
    total = 0.0
    for j in (0, 1):
        for k in (0, 1):
            if q[k] > 0 and p[j, k] > 0:
                total += q[k] * p[j, k] * math.log2(p[j, k] / pj[j])
    return float(max(total, 0.0))


def mutual_information_full(source: BpskSource, cfg: ReceiverConfig) -> float:
    """I(K; Delta) in bits, keeping the whole integer outcome instead of a binary decision."""
    q = (source.q0, source.q1)
    if min(q) == 0.0:
        return 0.0
    grid = decision_grid(source, cfg)
    w = np.vstack(_weighted_log_likelihoods(source, cfg, grid))  # log q_k S_k(Delta)
    log_p_delta = logsumexp(w, axis=0)
    total = 0.0
    for k in (0, 1):
        lik = w[k] - math.log(q[k])
        ok = np.isfinite(lik)
        total += math.fsum(np.exp(w[k][ok]) * (lik[ok] - log_p_delta[ok]))
    return max(total / math.log(2.0), 0.0)


def figures_of_merit(rule: DecisionRule, source: BpskSource, cfg: ReceiverConfig) -> FiguresOfMerit:
    m = channel_matrix(rule, source, cfg)
    return FiguresOfMerit(error_probability(m, source.q0), mutual_information(m, source.q0))


def default_rule(source: BpskSource, cfg: ReceiverConfig, kind: RuleKind | None = None) -> DecisionRule:
    """Sign rule on a balanced splitter, MAP otherwise, unless a kind is forced."""
    if kind is None:
        kind = RuleKind.SIGN_RANDOMIZED if cfg.balanced else RuleKind.MAP_THRESHOLD
    if kind is RuleKind.SIGN_RANDOMIZED:
        return DecisionRule.sign_randomized()
    return map_threshold(source, cfg)
