"""Python bindings for the lendsim lending-protocol simulator."""

import csv
import io
import json
import os

from . import _lendsim
from ._lendsim import (
    LendsimError,
    ValidationError,
    borrow_rate,
    divergent_loss,
    logistic_clustered,
    ols_newey_west,
    supply_rate,
)

__version__ = _lendsim.__version__

__all__ = [
    "LendsimError",
    "Run",
    "ValidationError",
    "borrow_rate",
    "cli",
    "divergent_loss",
    "load_scenario",
    "logistic_clustered",
    "ols_newey_west",
    "simulate",
    "supply_rate",
]


class Run:
    """Result of one simulation: summary dict, ledger events and pool snapshots."""

    def __init__(self, raw):
        self.summary = json.loads(raw["summary"])
        self.ledger_jsonl = raw["ledger"]
        self.snapshots_csv = raw["snapshots"]

    @property
    def events(self):
        return [json.loads(line) for line in self.ledger_jsonl.splitlines() if line]

    @property
    def snapshots(self):
        return list(csv.DictReader(io.StringIO(self.snapshots_csv)))


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def simulate(scenario, base_dir=None, **overrides):
    """Run a scenario given as a dict, JSON text or a path to a JSON file.

    Keyword overrides replace top-level scenario fields, e.g. ``seed=7``.
    """
    if isinstance(scenario, (str, os.PathLike)) and os.path.exists(scenario):
        path = os.fspath(scenario)
        if base_dir is None:
            base_dir = os.path.dirname(os.path.abspath(path))
        scenario = load_scenario(path)
    elif isinstance(scenario, str):
        scenario = json.loads(scenario)
    doc = dict(scenario)
    doc.update(overrides)
    return Run(_lendsim.simulate(json.dumps(doc), base_dir or ""))


def cli(*args):
    """Run the command-line tool in-process. Returns (exit_code, stdout, stderr)."""
    return _lendsim.cli([str(a) for a in args])
