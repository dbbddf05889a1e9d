"""Metropolis-Hastings sampling with Rao-Blackwellised occupation weights."""

import json as _json

from ._core import *  # noqa: F401,F403
from . import _core as _c

INF_ORDER = _c.INF_ORDER


def run_experiment(config: dict) -> dict:
    """Run an experiment from a config dict; returns the report as a dict."""
    return _json.loads(_c.run_experiment_json(_json.dumps(config)))


def run_experiment_to_dir(config: dict, output_dir: str) -> None:
    """Run an experiment and write report.json plus table/figure files."""
    _c.run_experiment_to_dir(_json.dumps(config), output_dir)
