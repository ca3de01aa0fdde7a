"""Two-layer RAN slicing simulator and learners.

Thin wrappers over the compiled core. Configs are TOML text, checkpoints and
reports are JSON.
"""

import json
from pathlib import Path

import numpy as np

from ._core import RansliceError, mm1_sojourn
from . import _core

ALGORITHMS = ("raws", "ddpg", "td3", "raws-wo", "random")
CURVE_COLUMNS = ("episode", "day", "mean_reward", "mean_cost", "violation_rate")

__all__ = [
    "ALGORITHMS",
    "CURVE_COLUMNS",
    "RansliceError",
    "config_hash",
    "decode_action",
    "default_config",
    "evaluate",
    "load_config",
    "mm1_sojourn",
    "solve_inner",
    "train",
    "validate_queueing",
]


def default_config():
    return _core.default_config()


def load_config(path):
    """Canonical text of a config file; raises RansliceError on bad keys."""
    return _core.canonical_config(Path(path).read_text())


def config_hash(text):
    return _core.config_hash(text)


def train(config=None, algorithm=None, seed=None, episodes=None):
    """Returns (checkpoint dict, learning curve as a list of dicts)."""
    text = default_config() if config is None else config
    ckpt, rows = _core.train(text, algorithm, seed, episodes)
    return json.loads(ckpt), [dict(zip(CURVE_COLUMNS, r)) for r in rows]


def evaluate(checkpoint, config=None, seed=None):
    """Frozen rollout on the held-out days; returns the report dict."""
    if not isinstance(checkpoint, str):
        checkpoint = json.dumps(checkpoint)
    return json.loads(_core.evaluate(checkpoint, config, seed))


def solve_inner(instance):
    if not isinstance(instance, str):
        instance = json.dumps(instance)
    return json.loads(_core.solve_inner(instance))


def validate_queueing(arrivals=1_000_000, seed=1):
    return json.loads(_core.validate_queueing(arrivals, seed))


def decode_action(fractions, num_bs, spectrum_capacity=18, compute_capacity=18):
    """Integer (S, C) allocations, each num_bs x 2."""
    f = np.asarray(fractions, dtype=float).ravel()
    return _core.decode_action(f, num_bs, spectrum_capacity, compute_capacity)
