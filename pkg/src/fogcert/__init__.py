"""Discrete-event simulation of location certification for mobile event producers.

Three architectures are modelled: fixed short-range brokers, cloud brokers
assigned to areas (complete-list or nonempty-list neighbour checks), and
collaborative neighbour polling. See ``fogcert.cli`` for the command line.
"""

from .config import RunConfig, load_config, parse_config
from .grid import CellGrid, Position, adjacent, cell_of
from .metrics import RunReport, aggregate, emit_report
from .model import CellId, Notification, certify, get_location_claim
from .runner import run
from .scenarios import scenario

__version__ = "0.1.0"

__all__ = [
    "CellGrid", "CellId", "Notification", "Position", "RunConfig", "RunReport", "adjacent", "aggregate",
    "cell_of", "certify", "emit_report", "get_location_claim", "load_config", "parse_config", "run", "scenario",
]
