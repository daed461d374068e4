"""Concurrent imitation dynamics in atomic congestion games."""

from .core import (
    CongestionGame,
    DomainError,
    ElasticityBounds,
    GameState,
    InvalidGameError,
    LatencyFunction,
    PreconditionError,
    Snapshot,
    averages,
    compute_bounds,
    eval_latency,
    latency_after_move,
    path_latency,
    rosenthal_potential,
)
from .dynamics import (
    DEFAULT_LAMBDA,
    STRICT_LAMBDA,
    MigrationVector,
    ProtocolParams,
    Trace,
    combined_round,
    exploration_round,
    imitation_round,
    run,
    sequential_imitation_step,
)
from .paths import Network, enumerate_paths, network_game, singleton_game

__version__ = "0.1.0"
