"""Weak-field homodyne receiver for binary phase-shift keying."""

from .baselines import helstrom_bound, homodyne_limit
from .decision import (
    ChannelMatrix,
    DecisionRule,
    FiguresOfMerit,
    RuleKind,
    channel_matrix,
    error_probability,
    figures_of_merit,
    map_posterior,
    map_threshold,
    mutual_information,
    mutual_information_full,
)
from .montecarlo import McEstimate, McProtocol, run_protocol, sample_shot
from .receiver import BpskSource, PortMeans, ReceiverConfig, phase_from_means, port_means
from .skellam import SkellamParams, Tail, skellam_log_pmf, skellam_oracle_pmf, skellam_pmf, skellam_tail

__version__ = "0.1.0"
