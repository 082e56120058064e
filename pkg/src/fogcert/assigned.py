"""Assigned-brokers architecture.

Every cell has a cloud broker. Producers find theirs through a discovery
service keyed by their claimed cell, beacon to each other over short range,
and attach the set of producers they currently hear (NP) to each
notification. The broker judges the claim against its own registered set
(P_B) and the registered sets of adjacent brokers (P_NB) using either the
complete-list (CLS) or nonempty-list (NLS) strategy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .engine import Event, EventKind, in_range_matrix
from .grid import CellGrid, neighbours
from .metrics import Delivered, Published, Sent
from .model import (
    CellId, ExtraLocationInfo, GroundTruth, Notification, certify, get_location_claim, make_notification,
)
from .oracle import GlobalSnapshot, oracle_verify
from .simulation import Simulation


class VerificationStrategy(Enum):
    CLS = "cls"
    NLS = "nls"


@dataclass
class AssignedBroker:
    id: int
    cell: CellId
    registry_ttl: int = 6000
    registry: dict = field(default_factory=dict)  # producer -> last certified publication
    neighbor_registries: dict = field(default_factory=dict)  # adjacent cell -> frozenset

    def registered(self, now, exclude=None):
        ttl = self.registry_ttl
        return {p for p, seen in self.registry.items() if now - seen < ttl and p != exclude}

    def neighbour_registered(self):
        out = set()
        for members in self.neighbor_registries.values():
            out |= members
        return out

    def expire(self, now):
        ttl = self.registry_ttl
        for p in [p for p, seen in self.registry.items() if now - seen >= ttl]:
            del self.registry[p]


@dataclass
class AssignedProducer:
    id: int
    broker: int | None = None
    heard: dict = field(default_factory=dict)  # neighbour -> time of last beacon heard
    ever_heard: set = field(default_factory=set)
    uncertified_streak: int = 0
    discoveries: int = 0

    def neighbor_list(self, now, ttl):
        return frozenset(q for q, t in self.heard.items() if now - t <= ttl)


class DiscoveryService:
    """Maps a location to the broker assigned to it."""

    def __init__(self, grid: CellGrid):
        self.grid = grid

    def lookup(self, location: CellId) -> int:
        return self.grid.index(self.grid.check(location))


def discover_broker(service: DiscoveryService, location: CellId) -> int:
    return service.lookup(location)


def assigned_prepare_extra(p: AssignedProducer, now, ttl) -> ExtraLocationInfo:
    return ExtraLocationInfo(p.neighbor_list(now, ttl))


def _np_of(n: Notification):
    return n.extra.neighbors if n.extra is not None else frozenset()


def verify_cls(b: AssignedBroker, n: Notification, now) -> bool:
    if get_location_claim(n) != b.cell:
        return False
    np_ = _np_of(n)
    pb = b.registered(now, exclude=n.producer)
    return pb <= np_ and np_ <= (pb | b.neighbour_registered())


def verify_nls(b: AssignedBroker, n: Notification, now) -> bool:
    if get_location_claim(n) != b.cell:
        return False
    return not _np_of(n).isdisjoint(b.registered(now))


def producer_beacon_tick(sim: "AssignedSimulation", p: AssignedProducer, now):
    """One producer beacons its id; in-range producers note it in their neighbour lists."""
    sim.beacon_round(now, [p.id])


def registry_exchange_tick(sim: "AssignedSimulation", now):
    sim.view = registry_exchange(sim.brokers, sim.grid, now)


def maintain_connection(p: AssignedProducer, certified: bool, threshold=2) -> bool:
    """Track consecutive uncertified results; True means the connection was cancelled."""
    if certified:
        p.uncertified_streak = 0
        return False
    p.uncertified_streak += 1
    if p.uncertified_streak >= threshold:
        p.broker = None
        p.uncertified_streak = 0
        return True
    return False


def registry_exchange(brokers, grid: CellGrid, now):
    """Refresh every broker's view of its Moore neighbours' registries.

    Returns the global cell -> registered-set view the refresh was built from.
    """
    view = {}
    for b in brokers:
        b.expire(now)
        if b.registry:
            view[b.cell] = frozenset(b.registry)
    by_cell = {b.cell: b for b in brokers}
    for b in brokers:
        b.neighbor_registries = {}
    for cell, members in view.items():
        for nb in neighbours(grid, cell):
            by_cell[nb].neighbor_registries[cell] = members
    return view


class AssignedSimulation(Simulation):
    arch = "assigned"

    def __init__(self, grid, trace, params, strategy="cls", beacon_interval_ms=2000, neighbor_ttl_ms=2000,
                 registry_ttl_ms=6000, exchange_interval_ms=2000, exchange_offset_ms=1000,
                 reconnect_threshold=2, hoard_neighbors=False, warmup_certify=True):
        self.strategy = VerificationStrategy(strategy).value
        super().__init__(grid, trace, params)
        self.beacon_interval = beacon_interval_ms
        self.neighbor_ttl = neighbor_ttl_ms
        self.exchange_interval = exchange_interval_ms
        self.exchange_offset = exchange_offset_ms
        self.threshold = reconnect_threshold
        self.hoard = hoard_neighbors
        self.warmup_certify = warmup_certify
        self.discovery = DiscoveryService(grid)
        self.brokers = [AssignedBroker(grid.index(c), c, registry_ttl_ms) for c in grid.cells()]
        self.producers = {pid: AssignedProducer(pid) for pid in self.pids}
        self.view = {}
        self.verify = verify_cls if self.strategy == "cls" else verify_nls
        self.switches = []  # (time, producer, broker)

    def start(self):
        self.schedule_periodic(EventKind.BEACON, 0, self.beacon_interval)
        self.schedule_periodic(EventKind.REGISTRY_EXCHANGE, self.exchange_offset, self.exchange_interval)
        self.schedule_publications(self.p.notification_interval_ms)

    def on_event(self, now, ev: Event):
        kind = ev.kind
        if kind is EventKind.PUBLISH:
            if self.publish_due(ev.target, now):
                self.publish(ev.target, now)
                self.reschedule(ev, now)
        elif kind is EventKind.DELIVER:
            n, _ = ev.payload
            self.handle(self.brokers[ev.target], n, now)
        elif kind is EventKind.BEACON:
            self.beacon_round(now)
            self.reschedule(ev, now)
        elif kind is EventKind.REGISTRY_EXCHANGE:
            self.view = registry_exchange(self.brokers, self.grid, now)
            self.reschedule(ev, now)

    def beacon_round(self, now, senders=None):
        """Producers (all, or the given ids) broadcast their id over short range."""
        pos = self.positions(now)
        rows = np.arange(self.n) if senders is None else np.asarray([self.pids.index(s) for s in senders])
        reach = in_range_matrix(self.radio, pos[rows], pos)
        reach[np.arange(len(rows)), rows] = False
        ttl = self.neighbor_ttl
        for r, i in enumerate(rows):
            cols = np.flatnonzero(reach[r])
            if not len(cols):
                continue
            ok = self.radio.received_many(len(cols))
            sender = self.pids[i]
            for j in cols[ok]:
                p = self.producers[self.pids[j]]
                p.heard[sender] = now
                p.ever_heard.add(sender)
        for p in self.producers.values():
            for q in [q for q, t in p.heard.items() if now - t > ttl]:
                del p.heard[q]

    def publish(self, pid, now):
        p = self.producers[pid]
        k = self.next_seq(pid)
        true_cell = self.cell_at(pid, now)
        claim = self.draw_claim(pid, now, true_cell)
        if self.hoard and claim != true_cell:
            extra = ExtraLocationInfo(frozenset(p.ever_heard))
        else:
            extra = assigned_prepare_extra(p, now, self.neighbor_ttl)
        n = make_notification(pid, k, now, claim, extra)
        self.ledger.record(Published(n.key, now, GroundTruth(true_cell, claim), self.is_counted(pid, k, now)))
        self.ledger.record(Sent(n.key, claim))
        # the local broker reconnects whenever the location it reports changes area
        target = discover_broker(self.discovery, claim)
        if p.broker != target:
            p.broker = target
            p.discoveries += 1
            p.uncertified_streak = 0
            self.switches.append((now, pid, target))
        self.uplink.send(self.q, now, n, p.broker, None)

    def handle(self, b: AssignedBroker, n: Notification, now):
        pid = n.producer
        # warm-up notifications are all honest; certifying them seeds the registries
        bootstrap = self.warmup_certify and n.created_at < self.p.warmup_ms
        snap = GlobalSnapshot(
            now, pid, broker_cell=b.cell, neighbor_list=tuple(sorted(_np_of(n))),
            registry=dict(b.registry), registry_ttl=b.registry_ttl, exchange_view=self.view,
            bootstrap=bootstrap,
        )
        verdict = self.verify(b, n, now) or (bootstrap and get_location_claim(n) == b.cell)
        self.check_oracle(verdict, oracle_verify(self.strategy, snap, n), n.key)
        out = certify(n, verdict)
        claim = get_location_claim(out)
        cause = ""
        truth = self.ledger.truth.get(n.key)
        if verdict and truth is not None and claim != truth.true_cell:
            empty = not snap.neighbor_list and not b.registered(now, exclude=pid)
            cause = "empty-area" if empty else "neighbour-overlap"
        if verdict:
            b.registry[pid] = now
        self.ledger.record(Delivered(n.key, claim, verdict, b.id, cause))
        maintain_connection(self.producers[pid], verdict, self.threshold)
