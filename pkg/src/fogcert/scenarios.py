"""Small scripted placements with known outcomes.

Each scenario fixes the grid, the producers' tracks, who publishes when and
what they claim, so its report and audit are fully determined.
"""

from __future__ import annotations

from dataclasses import dataclass

from .assigned import AssignedSimulation
from .collaborative import CollaborativeSimulation
from .errors import UnknownScenario
from .fixed import FixedSimulation
from .grid import CellGrid
from .metrics import RunReport
from .mobility import TraceSet
from .model import CellId
from .simulation import SimParams


@dataclass
class ScenarioResult:
    name: str
    report: RunReport
    audit: list  # NotificationAudit
    sim: object

    def outcome(self, pid):
        """Short label for producer ``pid``'s first publication."""
        a = next(a for a in self.audit if a.producer == pid and a.seq == 0)
        if a.first_outcome != "delivered":
            return a.first_outcome
        truthful = a.claim_at_send == a.true_cell
        return f"{'certified' if a.verdict else 'uncertified'}-{'true' if truthful else 'false'}"


def tracks(duration, paths) -> TraceSet:
    """``paths``: list of [(t_ms, x, y), ...] per producer, in id order. Single points stay put."""
    times, xs, ys = {}, {}, {}
    for pid, pts in enumerate(paths):
        if pts[0][0] != 0:
            raise ValueError("a track must start at t=0")
        times[pid] = [float(t) for t, _, _ in pts]
        xs[pid] = [float(x) for _, x, _ in pts]
        ys[pid] = [float(y) for _, _, y in pts]
    return TraceSet(times, xs, ys, duration)


def _params(duration, **kw):
    return SimParams(duration_ms=duration, publish_tail_ms=0, max_publications=1, **kw)


def fig7():
    """Four producers around the shared corner of a 2x2 grid of 200 m cells.

    Brokers beacon at 0, 2000, 4000 ms; everyone publishes once at 1000 ms.
    P1 (id 0) drifts into the uncovered corner and its send is lost. P2 (id 1)
    reaches the boundary exactly 100 m from its broker, which still hears it,
    but the claim names the neighbouring cell. P3 (id 2) never heard a beacon
    and queues, then flushes at 2000. P4 (id 3) walks out of range and loses
    its send.
    """
    grid = CellGrid(400, 400, 200)
    trace = tracks(6000, [
        [(0, 150, 100), (1000, 185, 185), (2000, 190, 190)],
        [(0, 180, 100), (1000, 200, 100), (2000, 250, 100)],
        [(0, 20, 220), (1000, 215, 215), (2000, 260, 290)],
        [(0, 300, 260), (1000, 190, 330), (2000, 150, 300)],
    ])
    params = _params(6000, publish_offsets={pid: 1000 for pid in range(4)})
    return FixedSimulation(grid, trace, params)


def lonely_cls():
    """A lone producer in cell(0,0) claims the empty cell(2,2); CLS has nothing to compare against."""
    grid = CellGrid(300, 300, 100)
    trace = tracks(5000, [[(0, 50, 50)]])
    params = _params(5000, publish_offsets={0: 1000}, forced_claims={0: CellId(2, 2)})
    return AssignedSimulation(grid, trace, params, strategy="cls")


def liar_corrected():
    """One liar and two honest producers share cell(0,0); the poll outvotes the lie."""
    grid = CellGrid(400, 400, 200)
    trace = tracks(5000, [[(0, 50, 50)], [(0, 60, 50)], [(0, 50, 60)]])
    params = _params(5000, publish_offsets={0: 1000}, forced_claims={0: CellId(1, 1)})
    return CollaborativeSimulation(grid, trace, params)


def edge_tie():
    """An honest producer near the edge of cell(0,0) hears a single neighbour across it: a 1-1 tie."""
    grid = CellGrid(400, 400, 200)
    trace = tracks(5000, [[(0, 190, 100)], [(0, 230, 100)]])
    params = _params(5000, publish_offsets={0: 1000})
    return CollaborativeSimulation(grid, trace, params)


SCENARIOS = {
    "fig7": fig7,
    "lonely-cls": lonely_cls,
    "liar-corrected": liar_corrected,
    "edge-tie": edge_tie,
}


def scenario(name) -> ScenarioResult:
    build = SCENARIOS.get(name)
    if build is None:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    sim = build()
    report = sim.run()
    return ScenarioResult(name, report, sim.audit, sim)
