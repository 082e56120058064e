"""Fixed-brokers architecture.

A broker sits at the centre of every cell and beacons over short range.
Producers latch onto the first broker they hear while disconnected and send
their notifications to it; the broker certifies a claim iff it names the
broker's own cell.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .engine import Event, EventKind, in_range, in_range_matrix
from .grid import Position, broker_anchor
from .metrics import Delivered, Flushed, Lost, Published, Queued, Sent
from .model import (
    EMPTY_EXTRA, CellId, ExtraLocationInfo, GroundTruth, Notification, certify, get_location_claim,
    make_notification,
)
from .oracle import GlobalSnapshot, oracle_verify
from .simulation import Simulation


@dataclass
class FixedBroker:
    id: int
    cell: CellId
    anchor: Position
    connected: dict = field(default_factory=dict)  # producer -> last_heard


@dataclass
class FixedProducerConn:
    broker: int | None = None
    last_beacon: int = 0
    queue: deque = field(default_factory=deque)

    @property
    def connected(self):
        return self.broker is not None


def fixed_prepare_extra() -> ExtraLocationInfo:
    return EMPTY_EXTRA


def fixed_verify(b: FixedBroker, n: Notification) -> bool:
    return get_location_claim(n) == b.cell


def connection_timeout_check(p: FixedProducerConn, now, max_connection_ms=2000) -> bool:
    """Drop a stale connection. Returns True if this call disconnected the producer."""
    if p.broker is not None and now - p.last_beacon > max_connection_ms:
        p.broker = None
        return True
    return False


def broker_beacon_tick(sim: "FixedSimulation", b: FixedBroker, now):
    """One broker beacons from its anchor."""
    sim.beacon_round(now, [b.id])


class FixedSimulation(Simulation):
    arch = "fixed"

    def __init__(self, grid, trace, params, beacon_interval_ms=2000, max_connection_ms=2000,
                 beacon_offset_ms=0, sample_interval_ms=0):
        super().__init__(grid, trace, params)
        # 0: exact timeout events per connection; >0: periodic sweep at that granularity
        self.sample_interval = sample_interval_ms
        self.beacon_interval = beacon_interval_ms
        self.max_connection = max_connection_ms
        self.beacon_offset = beacon_offset_ms
        self.brokers = [FixedBroker(grid.index(c), c, broker_anchor(grid, c)) for c in grid.cells()]
        self.anchors = np.array([b.anchor for b in self.brokers], dtype=float)
        self.conn = {pid: FixedProducerConn() for pid in self.pids}
        self.connections = []  # (time, producer, broker) log

    def start(self):
        self.schedule_periodic(EventKind.BEACON, self.beacon_offset, self.beacon_interval)
        if self.sample_interval:
            self.schedule_periodic(EventKind.TRACE_SAMPLE, 0, self.sample_interval)
        self.schedule_publications(self.p.notification_interval_ms)

    def on_event(self, now, ev: Event):
        if ev.kind is EventKind.BEACON:
            self.beacon_round(now)
            self.reschedule(ev, now)
        elif ev.kind is EventKind.PUBLISH:
            if self.publish_due(ev.target, now):
                self.publish(ev.target, now)
                self.reschedule(ev, now)
        elif ev.kind is EventKind.CONNECTION_TIMEOUT:
            self.expire(ev.target, now)
        elif ev.kind is EventKind.TRACE_SAMPLE:
            for pid in self.pids:
                self.expire(pid, now)
            self.reschedule(ev, now)

    # -- connection management -----------------------------------------------------------

    def expire(self, pid, now):
        c = self.conn[pid]
        b = c.broker
        if connection_timeout_check(c, now, self.max_connection):
            # the broker forgets the producer symmetrically
            self.brokers[b].connected.pop(pid, None)

    def _refresh(self, pid, b, now):
        c = self.conn[pid]
        c.broker = b
        c.last_beacon = now
        self.brokers[b].connected[pid] = now
        if not self.sample_interval:
            self.q.schedule(now + self.max_connection + 1, Event(EventKind.CONNECTION_TIMEOUT, pid))

    def beacon_round(self, now, brokers=None):
        """Every broker (or the given subset) beacons at ``now``."""
        idx = np.arange(len(self.brokers)) if brokers is None else np.asarray(brokers)
        pos = self.positions(now)
        reach = in_range_matrix(self.radio, self.anchors[idx], pos)
        heard = np.zeros_like(reach)
        for row in range(len(idx)):
            cols = np.flatnonzero(reach[row])
            if len(cols):
                heard[row, cols] = self.radio.received_many(len(cols))
        for j, pid in enumerate(self.pids):
            self.expire(pid, now)
            c = self.conn[pid]
            rows = np.flatnonzero(heard[:, j])
            if not len(rows):
                continue
            senders = idx[rows]
            if c.connected:
                if c.broker in senders:
                    self._refresh(pid, c.broker, now)
                continue
            d = ((self.anchors[senders] - pos[j]) ** 2).sum(axis=1)
            b = int(senders[np.lexsort((senders, d))[0]])
            self._refresh(pid, b, now)
            self.connections.append((now, pid, b))
            self.flush(pid, now)

    def flush(self, pid, now):
        c = self.conn[pid]
        while c.queue:
            n = c.queue.popleft()
            self.ledger.record(Flushed(n.key))
            self.transmit(pid, c.broker, n, now, flushed=True)

    # -- publication -----------------------------------------------------------------------

    def publish(self, pid, now):
        self.expire(pid, now)
        k = self.next_seq(pid)
        true_cell = self.cell_at(pid, now)
        claim = self.draw_claim(pid, now, true_cell)
        n = make_notification(pid, k, now, claim, fixed_prepare_extra())
        self.ledger.record(Published(n.key, now, GroundTruth(true_cell, claim), self.is_counted(pid, k, now)))
        self.ledger.record(Sent(n.key, claim))
        c = self.conn[pid]
        if c.connected:
            self.transmit(pid, c.broker, n, now)
        else:
            c.queue.append(n)
            self.ledger.record(Queued(n.key))

    def transmit(self, pid, b, n, now, flushed=False):
        broker = self.brokers[b]
        # the connection may be stale: range is re-checked at send time
        if not (in_range(self.radio, self.position(pid, now), broker.anchor) and self.radio.received()):
            self.ledger.record(Lost(n.key))
            return
        self.handle(broker, pid, n, now, flushed)

    def handle(self, broker: FixedBroker, pid, n, now, flushed):
        verdict = fixed_verify(broker, n)
        self.check_oracle(verdict, oracle_verify("fixed", GlobalSnapshot(now, pid, broker_cell=broker.cell), n), n.key)
        out = certify(n, verdict)
        claim = get_location_claim(out)
        cause = ""
        truth = self.ledger.truth.get(n.key)
        if truth is not None and verdict != (claim == truth.true_cell):
            # uncertified-true, or a queued false claim that happens to name the new broker's cell
            cause = "queue-flush" if flushed else "overlap-edge"
        self.ledger.record(Delivered(n.key, claim, verdict, broker.id, cause))
