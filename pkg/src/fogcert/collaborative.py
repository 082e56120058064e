"""Collaborative architecture: location verification by neighbour polling.

At publish time a producer's local broker polls the producers in short range.
Each reply carries the replier's locally proposed cell. When the poll window
closes the proposal plus the replies are tallied; a unique majority over at
least two votes replaces the claim and sets ``collaborativelyDecided``. The
cloud broker only reads that flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Event, EventKind, in_range_matrix
from .metrics import Delivered, Published, Sent
from .model import (
    COLLAB_DECIDED, LOCATION, VALUE, CellId, GroundTruth, Notification, certify, get_location_claim,
    make_notification, read_collab_flag,
)
from .oracle import GlobalSnapshot, oracle_verify
from .simulation import Simulation


@dataclass
class PollTally:
    entries: dict = field(default_factory=dict)  # cell -> votes
    includes_local: bool = False

    @property
    def total(self):
        return sum(self.entries.values())

    def add(self, cell: CellId):
        self.entries[cell] = self.entries.get(cell, 0) + 1


@dataclass(frozen=True)
class PollOutcome:
    decided: bool
    cell: CellId | None = None


UNDECIDED = PollOutcome(False)


def start_tally(proposed: CellId) -> PollTally:
    t = PollTally(includes_local=True)
    t.add(proposed)
    return t


def poll_neighbors(proposed: CellId, replies) -> PollTally:
    """Tally the local proposal together with the received reply cells."""
    t = start_tally(proposed)
    for c in replies:
        t.add(c)
    return t


def decide(t: PollTally) -> PollOutcome:
    if t.total <= 1:
        return UNDECIDED
    top = max(t.entries.values())
    winners = [c for c, v in t.entries.items() if v == top]
    if len(winners) != 1:
        return UNDECIDED
    return PollOutcome(True, winners[0])


def collab_prepare_extra(outcome: PollOutcome, proposed: CellId):
    """(claim, flag): the decided cell replaces the proposal, else the proposal stands."""
    if outcome.decided:
        return outcome.cell, True
    return proposed, False


def collab_verify(n: Notification):
    """Return (verdict, notification without the flag). Raises MissingFlag."""
    flag = read_collab_flag(n)
    return flag, n.without_triple(LOCATION, COLLAB_DECIDED)


@dataclass
class CollabBroker:
    id: int
    processed: int = 0


@dataclass
class PendingPoll:
    notification: Notification
    proposed: CellId
    replies: list


class CollaborativeSimulation(Simulation):
    arch = "collaborative"
    track_mutations = True

    def __init__(self, grid, trace, params, poll_wait_ms=2000, broker_count=4):
        super().__init__(grid, trace, params)
        if broker_count < 1:
            raise ValueError("broker_count must be at least 1")
        self.poll_wait = poll_wait_ms
        self.brokers = [CollabBroker(i) for i in range(broker_count)]
        self.lie = {}  # pid -> false cell proposed during the current publication interval
        self.pending = {}  # notification key -> PendingPoll
        self.polls = []  # (key, proposed, replies, outcome) for inspection
        self.snapshots = {}  # key -> raw poll captured when the tally closed, for the oracle

    def start(self):
        self.schedule_publications(self.p.notification_interval_ms)

    def on_event(self, now, ev: Event):
        if ev.kind is EventKind.PUBLISH:
            if self.publish_due(ev.target, now):
                self.publish(ev.target, now)
                self.reschedule(ev, now)
        elif ev.kind is EventKind.POLL_DEADLINE:
            self.close_poll(ev.payload, now)
        elif ev.kind is EventKind.DELIVER:
            n, _ = ev.payload
            self.handle(self.brokers[ev.target], n, now)

    def locally_proposed(self, pid, now):
        false_cell = self.lie.get(pid)
        return false_cell if false_cell is not None else self.cell_at(pid, now)

    def publish(self, pid, now):
        k = self.next_seq(pid)
        true_cell = self.cell_at(pid, now)
        proposed = self.draw_claim(pid, now, true_cell)
        self.lie[pid] = proposed if proposed != true_cell else None
        n = make_notification(pid, k, now, proposed)
        self.ledger.record(Published(n.key, now, GroundTruth(true_cell, proposed), self.is_counted(pid, k, now)))
        self.pending[n.key] = PendingPoll(n, proposed, self.poll(pid, now))
        self.q.schedule(now + self.poll_wait, Event(EventKind.POLL_DEADLINE, pid, n.key))

    def poll(self, pid, now):
        """Short-range poll; in-range producers answer at once, each reply subject to loss."""
        pos = self.positions(now)
        i = self.pids.index(pid)
        reach = in_range_matrix(self.radio, pos[i:i + 1], pos)[0]
        reach[i] = False
        cols = np.flatnonzero(reach)
        ok = self.radio.received_many(len(cols))
        return [self.locally_proposed(self.pids[j], now) for j in cols[ok]]

    def close_poll(self, key, now):
        pp = self.pending.pop(key)
        outcome = decide(poll_neighbors(pp.proposed, pp.replies))
        claim, flag = collab_prepare_extra(outcome, pp.proposed)
        n = pp.notification.with_triple(LOCATION, VALUE, claim).with_triple(LOCATION, COLLAB_DECIDED, flag)
        self.polls.append((key, pp.proposed, tuple(pp.replies), outcome))
        self.ledger.record(Sent(key, claim))
        broker = key[0] % len(self.brokers)
        self.snapshots[key] = GlobalSnapshot(now, key[0], proposed=pp.proposed, replies=tuple(pp.replies))
        self.uplink.send(self.q, now, n, broker, None)

    def handle(self, b: CollabBroker, n: Notification, now):
        b.processed += 1
        expected = oracle_verify("collaborative", self.snapshots.pop(n.key), n)
        verdict, stripped = collab_verify(n)
        self.check_oracle(verdict, expected, n.key)
        out = certify(stripped, verdict)
        self.ledger.record(Delivered(n.key, get_location_claim(out), verdict, b.id))
