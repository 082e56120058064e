"""Brute-force re-derivation of certification verdicts from raw captured state.

Nothing here calls into the architecture modules: registries are filtered,
adjacency is recomputed and polls are tallied from the raw values recorded in
a GlobalSnapshot at the moment the broker decided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SnapshotIncomplete
from .model import COLLAB_DECIDED, LOCATION, VALUE, CellId, Notification

ARCH_KINDS = ("fixed", "cls", "nls", "collaborative")


@dataclass
class GlobalSnapshot:
    time: int
    sender: int
    broker_cell: CellId | None = None
    # assigned architecture
    neighbor_list: tuple | None = None
    registry: dict | None = None  # raw producer -> last_seen of the processing broker
    registry_ttl: int | None = None
    exchange_view: dict | None = None  # every cell's registered set at the last exchange
    bootstrap: bool = False  # warm-up: honest claims for the broker's own cell are accepted outright
    # collaborative architecture
    proposed: CellId | None = None
    replies: tuple | None = None  # reply cells, in arrival order
    extra: dict = field(default_factory=dict)


def _claim(n: Notification):
    for t in n.triples:
        if t.name1 == LOCATION and t.name2 == VALUE:
            return t.value
    raise SnapshotIncomplete("notification carries no location claim")


def _need(snapshot, *names):
    missing = [k for k in names if getattr(snapshot, k) is None]
    if missing:
        raise SnapshotIncomplete(f"snapshot lacks {', '.join(missing)}")


def _touching(a: CellId, b: CellId):
    if a.row == b.row and a.col == b.col:
        return False
    return a.row - 1 <= b.row <= a.row + 1 and a.col - 1 <= b.col <= a.col + 1


def _registered(snapshot):
    out = []
    for pid, seen in snapshot.registry.items():
        if pid == snapshot.sender:
            continue
        if snapshot.time - seen < snapshot.registry_ttl:
            out.append(pid)
    return out


def _neighbour_registered(snapshot, cell):
    out = []
    for other, members in snapshot.exchange_view.items():
        if _touching(cell, other):
            out.extend(members)
    return out


def tally_votes(proposed, replies):
    counts = {}
    for c in [proposed, *replies]:
        counts[c] = counts.get(c, 0) + 1
    return counts


def poll_result(proposed, replies):
    """(decided?, cell) by exhaustive scan of the vote counts."""
    counts = tally_votes(proposed, replies)
    total = 0
    for v in counts.values():
        total += v
    best = None
    best_n = 0
    ties = 0
    for cell, v in counts.items():
        if v > best_n:
            best, best_n, ties = cell, v, 1
        elif v == best_n:
            ties += 1
    if total > 1 and ties == 1:
        return True, best
    return False, proposed


def oracle_verify(arch: str, snapshot: GlobalSnapshot, n: Notification) -> bool:
    if arch not in ARCH_KINDS:
        raise ValueError(f"unknown architecture kind {arch!r}")
    claim = _claim(n)
    if arch == "fixed":
        _need(snapshot, "broker_cell")
        return claim == snapshot.broker_cell
    if arch in ("cls", "nls"):
        _need(snapshot, "broker_cell", "neighbor_list", "registry", "registry_ttl", "exchange_view")
        if claim != snapshot.broker_cell:
            return False
        if snapshot.bootstrap:
            return True
        np_list = list(snapshot.neighbor_list)
        pb = _registered(snapshot)
        if arch == "nls":
            for a in np_list:
                for b in pb:
                    if a == b:
                        return True
            return False
        for b in pb:
            if b not in np_list:
                return False
        allowed = pb + _neighbour_registered(snapshot, snapshot.broker_cell)
        for a in np_list:
            if a not in allowed:
                return False
        return True
    _need(snapshot, "proposed", "replies")
    decided, cell = poll_result(snapshot.proposed, snapshot.replies)
    flag = None
    for t in n.triples:
        if t.name1 == LOCATION and t.name2 == COLLAB_DECIDED:
            flag = t.value
    if flag is None:
        raise SnapshotIncomplete("collaborative notification lacks its decision flag")
    # claim and flag must both match what the poll implies
    return decided and claim == cell
