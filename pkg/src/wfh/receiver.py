"""BPSK source and weak-field homodyne interferometer.

The signal ``|alpha e^{i phi}>`` and a real local oscillator ``|z>`` meet on a
beam splitter of transmissivity ``tau``; each output port is counted by a
photon-number-resolving detector.  Everything downstream only needs the two
Poisson means per symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .skellam import SkellamParams

# Symbol k is sent with phase PHASES[k]: symbol 0 is |-alpha>, symbol 1 is |alpha>.
PHASES = (math.pi, 0.0)


@dataclass(frozen=True)
class BpskSource:
    alpha_sq: float
    q0: float = 0.5

    def __post_init__(self):
        if not math.isfinite(self.alpha_sq) or self.alpha_sq < 0:
            raise ValueError(f"alpha_sq must be nonnegative, got {self.alpha_sq!r}")
        if not 0.0 <= self.q0 <= 1.0:
            raise ValueError(f"q0 must lie in [0, 1], got {self.q0!r}")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha_sq)

    @property
    def q1(self) -> float:
        return 1.0 - self.q0

    def prior(self, k: int) -> float:
        return self.q0 if k == 0 else self.q1


@dataclass(frozen=True)
class ReceiverConfig:
    """LO energy, beam-splitter transmissivity, visibility and dark-count mean per port."""

    z_sq: float
    tau: float = 0.5
    xi: float = 1.0
    dark_mean: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.z_sq) or self.z_sq < 0:
            raise ValueError(f"z_sq must be nonnegative, got {self.z_sq!r}")
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau!r}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi!r}")
        if not math.isfinite(self.dark_mean) or self.dark_mean < 0:
            raise ValueError(f"dark_mean must be nonnegative, got {self.dark_mean!r}")

    @property
    def z(self) -> float:
        return math.sqrt(self.z_sq)

    @property
    def balanced(self) -> bool:
        return self.tau == 0.5


# The port means are exactly the parameters of the photon-difference distribution.
PortMeans = SkellamParams


def interference_amplitude(source: BpskSource, cfg: ReceiverConfig) -> float:
    """Coefficient of cos(phi) in the transmitted-port mean."""
    return 2.0 * cfg.xi * math.sqrt(cfg.tau * (1.0 - cfg.tau)) * cfg.z * source.alpha


def port_means(source: BpskSource, cfg: ReceiverConfig, phi: float) -> PortMeans:
    tau = cfg.tau
    cross = interference_amplitude(source, cfg) * math.cos(phi)
    mu_t = tau * source.alpha_sq + (1.0 - tau) * cfg.z_sq + cross
    mu_r = (1.0 - tau) * source.alpha_sq + tau * cfg.z_sq - cross
    # Exact cancellation can leave a -1e-16 residue at full destructive interference.
    return PortMeans(max(mu_t, 0.0) + cfg.dark_mean, max(mu_r, 0.0) + cfg.dark_mean)


def symbol_means(source: BpskSource, cfg: ReceiverConfig, k: int) -> PortMeans:
    if k not in (0, 1):
        raise ValueError(f"symbol must be 0 or 1, got {k!r}")
    return port_means(source, cfg, PHASES[k])


def phase_from_means(source: BpskSource, cfg: ReceiverConfig, mu_t_observed: float) -> float:
    """Relative signal/LO phase in [0, pi] from the transmitted-port mean.

    Raises ValueError when the interference term vanishes (no phase
    information) or when the observed mean is outside the band reachable by
    any phase.
    """
    amp = interference_amplitude(source, cfg)
    if amp == 0.0:
        raise ValueError("interference amplitude is zero; phase is undefined")
    offset = cfg.dark_mean + cfg.tau * source.alpha_sq + (1.0 - cfg.tau) * cfg.z_sq
    c = (mu_t_observed - offset) / amp
    slack = 1e-12
    if not -1.0 - slack <= c <= 1.0 + slack:
        lo, hi = offset - amp, offset + amp
        raise ValueError(f"observed mean {mu_t_observed!r} outside reachable band [{lo}, {hi}]")
    return math.acos(min(1.0, max(-1.0, c)))
