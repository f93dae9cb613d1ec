"""Invariant suite behind ``wfh validate``.

Each check runs at pinned parameter points and returns ``(ok, detail)``.
The pmf used by the distribution checks is injectable so the harness itself
can be shown to catch a perturbed implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .baselines import helstrom_bound, homodyne_limit
from .decision import (
    DecisionRule,
    binary_entropy,
    channel_matrix,
    error_probability,
    figures_of_merit,
    map_threshold,
    mutual_information,
    mutual_information_full,
)
from .montecarlo import McProtocol, run_protocol
from .receiver import BpskSource, ReceiverConfig, phase_from_means, port_means, symbol_means
from .skellam import SkellamParams, skellam_oracle_pmf, skellam_pmf

PmfFn = Callable[[np.ndarray, SkellamParams], np.ndarray]

MEAN_GRID = (0.1, 1.0, 5.0, 20.0, 50.0)
FIG4 = dict(alpha_sq=1.97, xi=0.91, tau=0.5, q0=0.5)
FIG6 = dict(alpha_sq=2.37, z_sq=10.88, xi=0.86, tau=0.545)


def perturbed_pmf(factor: float = 1 + 1e-6) -> PmfFn:
    """skellam_pmf with the Delta = 0 value scaled by ``factor``."""

    def pmf(delta, params):
        out = np.array(skellam_pmf(delta, params), dtype=float)
        out[np.asarray(delta) == 0] *= factor
        return out

    return pmf


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def _fig4(z_sq: float) -> tuple[BpskSource, ReceiverConfig]:
    return BpskSource(FIG4["alpha_sq"], FIG4["q0"]), ReceiverConfig(z_sq, FIG4["tau"], FIG4["xi"])


def _fig6(q0: float) -> tuple[BpskSource, ReceiverConfig]:
    return BpskSource(FIG6["alpha_sq"], q0), ReceiverConfig(FIG6["z_sq"], FIG6["tau"], FIG6["xi"])


def check_oracle(pmf: PmfFn) -> tuple[bool, str]:
    deltas = np.arange(-60, 61)
    worst = 0.0
    for a in MEAN_GRID:
        for b in MEAN_GRID:
            p = SkellamParams(a, b)
            fast = pmf(deltas, p)
            slow = np.array([skellam_oracle_pmf(int(d), p) for d in deltas])
            worst = max(worst, float(np.max(np.abs(fast - slow) / slow)))
    return worst <= 1e-10, f"max relative error {worst:.3g}"


def _support(p: SkellamParams) -> np.ndarray:
    k = math.ceil(abs(p.mu_t - p.mu_r) + 12 * math.sqrt(p.mu_t + p.mu_r) + 12)
    return np.arange(-k, k + 1)


def check_normalization(pmf: PmfFn) -> tuple[bool, str]:
    worst = 0.0
    for a in MEAN_GRID:
        for b in MEAN_GRID:
            p = SkellamParams(a, b)
            worst = max(worst, abs(math.fsum(pmf(_support(p), p)) - 1.0))
    return worst <= 1e-10, f"max |sum - 1| = {worst:.3g}"


def check_moments(pmf: PmfFn) -> tuple[bool, str]:
    worst = 0.0
    for a in MEAN_GRID:
        for b in MEAN_GRID:
            p = SkellamParams(a, b)
            d = _support(p)
            w = pmf(d, p)
            mean = math.fsum(d * w)
            var = math.fsum((d - mean) ** 2 * w)
            worst = max(worst, abs(mean - (a - b)), abs(var - (a + b)))
    return worst <= 1e-8, f"max moment error {worst:.3g}"


def check_symmetry(pmf: PmfFn) -> tuple[bool, str]:
    d = np.arange(-40, 41)
    worst = 0.0
    for a, b in ((0.1, 5.0), (2.37, 10.88), (20.0, 1.0)):
        x, y = pmf(d, SkellamParams(a, b)), pmf(-d, SkellamParams(b, a))
        worst = max(worst, float(np.max(np.abs(x - y) / y)))
    return worst <= 1e-12, f"max relative asymmetry {worst:.3g}"


def check_energy_conservation() -> tuple[bool, str]:
    worst = 0.0
    for tau in (0.2, 0.5, 0.545, 0.8):
        for xi in (0.0, 0.5, 0.91, 1.0):
            s, c = BpskSource(2.37), ReceiverConfig(10.88, tau, xi, 0.1)
            for phi in np.linspace(0, 2 * np.pi, 13):
                m = port_means(s, c, phi)
                worst = max(worst, abs(m.mu_t + m.mu_r - 0.2 - 13.25))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def check_phase_roundtrip() -> tuple[bool, str]:
    s, c = BpskSource(FIG6["alpha_sq"]), ReceiverConfig(FIG6["z_sq"], FIG6["tau"], FIG6["xi"])
    worst = max(abs(phase_from_means(s, c, port_means(s, c, phi).mu_t) - phi) for phi in (0.1, 0.5, 1.0, 2.0, 3.0))
    return worst < 1e-10, f"max phase error {worst:.3g}"


def check_null_channel() -> tuple[bool, str]:
    worst = 0.0
    for s, c in ((BpskSource(0.0), ReceiverConfig(10.0)), (BpskSource(1.97), ReceiverConfig(0.0))):
        f = figures_of_merit(DecisionRule.sign_randomized(), s, c)
        worst = max(worst, abs(f.p_err - 0.5), abs(f.mi_bits))
    return worst <= 1e-10, f"max deviation {worst:.3g}"


def check_balanced_s0() -> tuple[bool, str]:
    s, c = BpskSource(1.97), ReceiverConfig(10.0, 0.5, 0.91)
    a, b = (float(skellam_pmf(0, symbol_means(s, c, k))) for k in (0, 1))
    return abs(a - b) <= 1e-12 * a, f"S0 = {a:.6g} vs {b:.6g}"


def check_map_optimality() -> tuple[bool, str]:
    for q0 in (0.5, 0.7, 0.9):
        s, c = _fig6(q0)
        best = error_probability(channel_matrix(map_threshold(s, c), s, c), q0)
        for th in range(-40, 41):
            alt = error_probability(channel_matrix(DecisionRule.fixed_threshold(th), s, c), q0)
            if alt < best - 1e-15:
                return False, f"threshold {th} beats MAP at q0={q0}"
        if best > min(q0, 1 - q0):
            return False, f"MAP error exceeds min prior at q0={q0}"
    return True, "MAP threshold optimal at q0 in {0.5, 0.7, 0.9}"


def check_mi_bounds() -> tuple[bool, str]:
    for q0 in (0.5, 0.7, 0.9):
        s, c = _fig6(q0)
        m = channel_matrix(map_threshold(s, c), s, c)
        mi = mutual_information(m, q0)
        full = mutual_information_full(s, c)
        if not 0 <= mi <= binary_entropy(q0):
            return False, f"MI {mi} outside [0, H2(q0)] at q0={q0}"
        if not full > mi:
            return False, f"full-outcome MI {full} not above binary MI {mi} at q0={q0}"
    return True, "0 <= MI <= H2(q0) and I(K;Delta) > I(K;J)"


def check_fig4_trend() -> tuple[bool, str]:
    zs = np.linspace(0.5, 30, 50)
    rule = DecisionRule.sign_randomized()
    foms = [figures_of_merit(rule, *_fig4(z)) for z in zs]
    pe = np.array([f.p_err for f in foms])
    mi = np.array([f.mi_bits for f in foms])
    ok = bool(np.all(np.diff(pe) <= 0) and np.all(np.diff(mi) >= 0))
    return ok, f"P_err {pe[0]:.4g} -> {pe[-1]:.4g}, MI {mi[0]:.4g} -> {mi[-1]:.4g}"


def check_fig6_trend() -> tuple[bool, str]:
    pe, mi = [], []
    for q0 in (0.5, 0.6, 0.7, 0.8, 0.9):
        s, c = _fig6(q0)
        f = figures_of_merit(map_threshold(s, c), s, c)
        pe.append(f.p_err)
        mi.append(f.mi_bits)
    ok = bool(np.all(np.diff(pe) < 0) and np.all(np.diff(mi) < 0))
    return ok, f"P_err {pe[0]:.4g} -> {pe[-1]:.4g}, MI {mi[0]:.4g} -> {mi[-1]:.4g}"


def check_bound_ordering() -> tuple[bool, str]:
    for a in (0.5, 1.0, 1.97, 3.0, 5.0):
        s, c = BpskSource(a), ReceiverConfig(20.0, 0.5, 1.0)
        wfh = figures_of_merit(DecisionRule.sign_randomized(), s, c).p_err
        if not helstrom_bound(a) <= homodyne_limit(a) <= wfh:
            return False, f"ordering broken at alpha_sq={a}"
    return True, "Helstrom <= homodyne <= WFH"


def check_homodyne_convergence() -> tuple[bool, str]:
    target = homodyne_limit(1.97)
    gaps = []
    for z in (1e2, 1e3, 1e4):
        s, c = BpskSource(1.97), ReceiverConfig(z, 0.5, 1.0)
        gaps.append(abs(figures_of_merit(DecisionRule.sign_randomized(), s, c).p_err - target))
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-2
    return ok, "gaps " + ", ".join(f"{g:.3g}" for g in gaps)


def mc_check(seed: int) -> tuple[bool, str]:
    lines = []
    ok = True
    points = [("fig4 z_sq=10", *_fig4(10.0)), ("fig6 q0=0.7", *_fig6(0.7))]
    for i, (label, s, c) in enumerate(points):
        rule = DecisionRule.sign_randomized() if c.balanced else map_threshold(s, c)
        exact = figures_of_merit(rule, s, c).p_err
        pe, mi = run_protocol(s, c, rule, McProtocol(seed=seed), point_index=i)
        sigma = math.sqrt(exact * (1 - exact) / 150_000)
        ok &= abs(pe.mean - exact) <= 3 * sigma
        lines.append(
            f"{label}: p_err_mc={pe.mean:.17g} +- {pe.error_bar:.17g}, mi_mc={mi.mean:.17g} "
            f"(analytic {exact:.6g}, 3 sigma {3 * sigma:.3g})"
        )
    return ok, "; ".join(lines)


def run_checks(seed: int = 0, pmf: PmfFn = skellam_pmf) -> list[CheckResult]:
    suite = [
        ("skellam oracle equivalence", lambda: check_oracle(pmf)),
        ("skellam normalization", lambda: check_normalization(pmf)),
        ("skellam moments", lambda: check_moments(pmf)),
        ("skellam symmetry", lambda: check_symmetry(pmf)),
        ("port-mean energy conservation", check_energy_conservation),
        ("phase retrieval roundtrip", check_phase_roundtrip),
        ("null channel", check_null_channel),
        ("balanced S0 identity", check_balanced_s0),
        ("MAP optimality", check_map_optimality),
        ("MI bounds and data processing", check_mi_bounds),
        ("LO sweep trend", check_fig4_trend),
        ("prior sweep trend", check_fig6_trend),
        ("bound ordering", check_bound_ordering),
        ("homodyne-limit convergence", check_homodyne_convergence),
        ("monte carlo vs analytic", lambda: mc_check(seed)),
    ]
    results = []
    for name, fn in suite:
        ok, detail = fn()
        results.append(CheckResult(name, bool(ok), detail))
    return results
