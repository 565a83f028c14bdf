"""Consensus formation for vague and uncertain beliefs."""

from vague_consensus.belief import (
    BeliefPair,
    BeliefState,
    DimensionError,
    InvalidWorldError,
    TruthValue,
    consensus_belief,
    consensus_truth,
    consensus_valuation,
    entropy,
    inconsistency,
    payoff,
    vagueness,
)
from vague_consensus.engine import (
    ConfigError,
    MetricsSnapshot,
    Mode,
    Population,
    RegimeConfig,
    RunConfig,
    Strategy,
    attempt_consensus,
    evidence_update,
    init_population,
    run,
    select_pair,
    snapshot,
    step,
)

__version__ = "0.1.0"
