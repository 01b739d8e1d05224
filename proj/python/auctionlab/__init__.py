"""Auction mechanism and learning experiments (bindings to the C++ core)."""

import json

from . import _core
from ._core import (
    SCHEMA_VERSION,
    AuctionError,
    Distribution,
    __version__,
    first_price_bids,
    monopoly_price,
    monopoly_revenue,
    scenario_names,
    virtual_value,
)

__all__ = [
    "SCHEMA_VERSION",
    "AuctionError",
    "Distribution",
    "__version__",
    "distribution",
    "first_price_bids",
    "monopoly_price",
    "monopoly_revenue",
    "plot_data",
    "run_auction",
    "run_experiment",
    "scenario_names",
    "virtual_value",
]


def distribution(law: dict) -> Distribution:
    """Law from its JSON form, e.g. {"family": "uniform", "a": 0, "b": 1}."""
    return Distribution.from_json(json.dumps(law))


def run_auction(mechanism: dict, bids):
    """(winner or None, payments) for one bid profile."""
    return _core.run_auction(json.dumps(mechanism), list(bids))


def run_experiment(config: dict) -> dict:
    return json.loads(_core.run_experiment_json(json.dumps(config)))


def plot_data(report: dict, kind: str) -> str:
    """CSV text for "bk-curve", "profit-curve" or "sample-complexity"."""
    return _core.plot_data_csv(json.dumps(report), kind)
