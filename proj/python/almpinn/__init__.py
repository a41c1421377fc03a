"""Physics-informed networks trained with an augmented Lagrangian.

Config dictionaries use the same keys as the command-line config files,
e.g. ``{"problem": "burgers", "method": "alm", "train.batches": 2000}``.
"""

from ._core import (
    CheckpointError,
    ConfigError,
    DivergenceError,
    Error,
    InvalidArgument,
    Network,
    UnknownProblem,
    data_term,
    error_report,
    evaluate_on_grid,
    exact,
    init_network,
    invert,
    load_checkpoint,
    residual,
    save_checkpoint,
    solve,
    true_v,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DivergenceError",
    "Error",
    "InvalidArgument",
    "Network",
    "UnknownProblem",
    "data_term",
    "error_report",
    "evaluate_on_grid",
    "exact",
    "init_network",
    "invert",
    "load_checkpoint",
    "residual",
    "save_checkpoint",
    "solve",
    "true_v",
]
