"""Supported policy optimization for offline RL.

Config overrides use the same nested keys as the CLI's --config JSON, e.g.
``train_spot(ds, density, spot={"lambda": 0.25, "steps": 2000})``.
"""

import json

from . import _core
from ._core import (
    Agent,
    Dataset,
    Density,
    env_names,
    generate_dataset,
    git_blob_hash,
    lambda_at,
    load_agent,
    load_dataset,
    load_density,
    run_cli,
    suboptimality_gap,
)

__all__ = [
    "Agent",
    "Dataset",
    "Density",
    "default_config",
    "env_names",
    "evaluate",
    "finetune",
    "generate_dataset",
    "git_blob_hash",
    "lambda_at",
    "load_agent",
    "load_dataset",
    "load_density",
    "run_cli",
    "suboptimality_gap",
    "train_density",
    "train_spot",
]


def default_config(env):
    return json.loads(_core.default_config(env))


def train_density(dataset, seed=0, **overrides):
    """Returns (density, loss_trace)."""
    return _core.train_density(dataset, json.dumps(overrides), seed)


def train_spot(dataset, density, seed=0, **overrides):
    """Returns (agent, summary rows)."""
    return _core.train_spot(dataset, density, json.dumps(overrides), seed)


def finetune(agent, dataset, seed=0, **overrides):
    """Returns (agent, summary rows)."""
    return _core.finetune(agent, dataset, json.dumps(overrides), seed)


def evaluate(agent, env, episodes=20, seed=0):
    return _core.evaluate(agent, env, episodes, seed)
