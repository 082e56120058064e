"""Machinery shared by the three architecture simulators."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .engine import Event, EventKind, EventQueue, RadioModel, RngStream, Uplink
from .grid import CellGrid, Position, cell_of
from .metrics import Ledger
from .mobility import TraceSet, _interp
from .model import CellId

log = logging.getLogger(__name__)


@dataclass
class SimParams:
    duration_ms: int = 3_600_000
    notification_interval_ms: int = 60_000
    pf: float = 0.0
    seed: int = 1
    radio_range_m: float = 100.0
    loss_prob: float = 0.0
    uplink_latency_ms: int = 50
    warmup_ms: int = 0
    sample_every: int = 1
    # no new publications in the final tail, so queued and in-flight notifications settle
    publish_tail_ms: int = 60_000
    # scripted runs only
    publish_offsets: dict | None = None  # pid -> first publish time, None disables publishing
    max_publications: int | None = None
    forced_claims: dict | None = None  # pid -> cell the producer always claims after warm-up
    check_ledger_every: int = 0


class Simulation:
    """Event loop, clock, mobility lookups, claim drawing and oracle bookkeeping.

    Subclasses implement ``on_event`` and ``start``.
    """

    arch = ""
    strategy = "-"
    track_mutations = False

    def __init__(self, grid: CellGrid, trace: TraceSet, params: SimParams):
        self.grid = grid
        self.trace = trace
        self.p = params
        self.q = EventQueue()
        self.rng = RngStream(params.seed)
        self.radio = RadioModel(params.radio_range_m, params.loss_prob, self.rng["radio"])
        self.uplink = Uplink(params.uplink_latency_ms)
        self.ledger = Ledger(
            self.arch, self.strategy, params.pf, params.seed,
            track_mutations=self.track_mutations, check_every=params.check_ledger_every,
        )
        self.pids = trace.producers
        self.n = len(self.pids)
        self.seq = {pid: 0 for pid in self.pids}
        self.cells = grid.cells()
        self.oracle_checked = 0
        self.oracle_failures = []
        self._pos_t = None
        self._pos = None
        self.processed = 0
        self.last_time = 0
        self._first_counted = {}

    # -- mobility ------------------------------------------------------------------

    def position(self, pid, t) -> Position:
        tr = self.trace
        return Position(*_interp(tr.times[pid], tr.xs[pid], tr.ys[pid], t))

    def positions(self, t) -> np.ndarray:
        if self._pos_t != t:
            self._pos = self.trace.positions_at(t)
            self._pos_t = t
        return self._pos

    def cell_at(self, pid, t) -> CellId:
        return cell_of(self.grid, self.position(pid, t))

    # -- claims -----------------------------------------------------------------------

    def draw_claim(self, pid, now, true_cell) -> CellId:
        """The producer's proposed cell: its true cell, or with probability pf another one."""
        if now < self.p.warmup_ms:
            return true_cell
        if self.p.forced_claims is not None and pid in self.p.forced_claims:
            return self.p.forced_claims[pid]
        g = self.rng["claims"]
        lie = g.random() < self.p.pf
        pick = int(g.integers(self.grid.n_cells - 1))
        if not lie:
            return true_cell
        idx = self.grid.index(true_cell)
        return self.grid.cell_at(pick if pick < idx else pick + 1)

    def next_seq(self, pid):
        s = self.seq[pid]
        self.seq[pid] = s + 1
        return s

    def is_counted(self, pid, k, created_at):
        """Past warm-up, and on the sampling grid anchored at the first post-warm-up publication."""
        if created_at < self.p.warmup_ms:
            return False
        k0 = self._first_counted.setdefault(pid, k)
        return (k - k0) % self.p.sample_every == 0

    # -- scheduling ---------------------------------------------------------------------

    def schedule_periodic(self, kind, first, interval, target=None):
        if first < self.p.duration_ms:
            self.q.schedule(first, Event(kind, target, interval))

    def reschedule(self, event: Event, now):
        nxt = now + event.payload
        if nxt < self.p.duration_ms:
            self.q.schedule(nxt, event)

    def schedule_publications(self, interval):
        offsets = self.p.publish_offsets
        for i, pid in enumerate(self.pids):
            if offsets is None:
                first = (i * interval) // max(self.n, 1)
            else:
                first = offsets.get(pid)
                if first is None:
                    continue
            self.schedule_periodic(EventKind.PUBLISH, first, interval, pid)

    def publish_due(self, pid, now):
        if now >= self.p.duration_ms - self.p.publish_tail_ms:
            return False
        m = self.p.max_publications
        return m is None or self.seq[pid] < m

    def check_oracle(self, ok_arch, ok_oracle, key, detail=""):
        self.oracle_checked += 1
        if ok_arch != ok_oracle:
            self.oracle_failures.append((key, ok_arch, ok_oracle, detail))
            log.error("oracle disagreement on %s: architecture=%s oracle=%s %s", key, ok_arch, ok_oracle, detail)

    # -- main loop -----------------------------------------------------------------------

    def start(self):
        raise NotImplementedError

    def on_event(self, now, event: Event):
        raise NotImplementedError

    def finish(self):
        pass

    def run(self):
        self.start()
        while len(self.q):
            now, event = self.q.pop()
            if now < self.last_time:
                raise AssertionError("clock ran backwards")
            self.last_time = now
            self.on_event(now, event)
            self.processed += 1
        self.finish()
        report = self.ledger.report
        errs = report.identity_errors()
        if report.in_flight or report.pending_send:
            errs.append(f"{report.in_flight} in flight and {report.pending_send} unsent at the end of the run")
        if errs:
            raise AssertionError(f"ledger identities broken: {errs}")
        return report

    @property
    def audit(self):
        return list(self.ledger.audit.values())
