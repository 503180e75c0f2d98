# Copyright (c) 2026, The jwdm authors
# SPDX-License-Identifier: Apache-2.0
"""Joint Wasserstein distribution matching lab."""

from ._jwdm import (
    ConvergenceError,
    Model,
    TrainingDiverged,
    cost_matrix,
    decomposition,
    default_config,
    exact_wasserstein,
    gaussian_frechet,
    gen_data,
    hungarian,
    resume,
    run_cli,
    sinkhorn,
    train,
)

__all__ = [
    "ConvergenceError",
    "Model",
    "TrainingDiverged",
    "cost_matrix",
    "decomposition",
    "default_config",
    "exact_wasserstein",
    "gaussian_frechet",
    "gen_data",
    "hungarian",
    "resume",
    "run_cli",
    "sinkhorn",
    "train",
]
