"""Temporal stereo depth, BEV pooling and size-aware NMS."""

import json

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, cmd_depth, cmd_gen_scene, cmd_nms, cmd_pool

__version__ = "0.1.0"


def run(command, config=None, seed=None):
    """Runs a CLI command in-process and returns (report dict, invariants_passed)."""
    fn = {"depth": cmd_depth, "nms": cmd_nms, "pool": cmd_pool, "gen-scene": cmd_gen_scene}[command]
    text, ok = fn(config, seed)
    return json.loads(text), ok
