"""Domain types shared by every architecture.

A notification is a set of attribute triples ``(name1, name2, value)``. The
location claim lives in ``("location", "value", cell)``; brokers add
``("location", "certified", bool)``. Extra verification data a producer
attaches for its broker (the neighbor list) travels in ``extra`` rather than
as triples, so it can be dropped wholesale once the broker has used it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import NamedTuple, Union

from .errors import AlreadyCertified, MissingFlag, MissingLocation

LOCATION = "location"
VALUE = "value"
CERTIFIED = "certified"
COLLAB_DECIDED = "collaborativelyDecided"
NUMBER_OF_REPLIES = "numberOfReplies"

ProducerId = int
BrokerId = int
SimTime = int  # milliseconds


class CellId(NamedTuple):
    row: int
    col: int

    def __str__(self):
        return f"cell({self.row},{self.col})"


TripleValue = Union[str, int, bool, CellId]


@dataclass(frozen=True)
class AttributeTriple:
    name1: str
    name2: str
    value: TripleValue

    @property
    def key(self):
        return (self.name1, self.name2)


@dataclass(frozen=True)
class ExtraLocationInfo:
    """Architecture-specific verification payload; ``neighbors`` is the NP list."""

    neighbors: frozenset = frozenset()

    def is_empty(self):
        return not self.neighbors


EMPTY_EXTRA = ExtraLocationInfo()


@dataclass(frozen=True)
class Notification:
    producer: ProducerId
    seq: int
    created_at: SimTime
    triples: tuple = ()
    extra: ExtraLocationInfo | None = None

    def __post_init__(self):
        ordered = tuple(sorted(self.triples, key=lambda t: t.key))
        keys = [t.key for t in ordered]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate attribute triple in notification {self.producer}/{self.seq}")
        object.__setattr__(self, "triples", ordered)

    def get(self, name1, name2, default=None):
        for t in self.triples:
            if t.name1 == name1 and t.name2 == name2:
                return t.value
        return default

    def has(self, name1, name2):
        return any(t.name1 == name1 and t.name2 == name2 for t in self.triples)

    def with_triple(self, name1, name2, value):
        kept = tuple(t for t in self.triples if t.key != (name1, name2))
        return replace(self, triples=kept + (AttributeTriple(name1, name2, value),))

    def without_triple(self, name1, name2):
        return replace(self, triples=tuple(t for t in self.triples if t.key != (name1, name2)))

    @property
    def key(self):
        return (self.producer, self.seq)


@dataclass(frozen=True)
class GroundTruth:
    true_cell: CellId
    claimed_cell: CellId


def make_notification(producer, seq, created_at, claim, extra=None, payload=()):
    triples = tuple(payload) + (AttributeTriple(LOCATION, VALUE, claim),)
    return Notification(producer, seq, created_at, triples, extra)


def get_location_claim(n: Notification) -> CellId:
    claim = n.get(LOCATION, VALUE)
    if claim is None:
        raise MissingLocation(f"notification {n.producer}/{n.seq} has no location/value triple")
    return claim


def certify(n: Notification, verdict: bool) -> Notification:
    """Insert the broker's certification triple and strip verification payload."""
    if n.has(LOCATION, CERTIFIED):
        raise AlreadyCertified(f"notification {n.producer}/{n.seq} is already certified")
    out = n.without_triple(LOCATION, COLLAB_DECIDED).with_triple(LOCATION, CERTIFIED, bool(verdict))
    return replace(out, extra=None)


def read_collab_flag(n: Notification) -> bool:
    flag = n.get(LOCATION, COLLAB_DECIDED)
    if flag is None:
        raise MissingFlag(f"notification {n.producer}/{n.seq} lacks collaborativelyDecided")
    return bool(flag)


# -- line-delimited trace dumps ------------------------------------------------

def _encode_value(v):
    if isinstance(v, CellId):
        return {"cell": [v.row, v.col]}
    return v


def _decode_value(v):
    if isinstance(v, dict):
        r, c = v["cell"]
        return CellId(r, c)
    return v


def serialize(n: Notification) -> str:
    extra = None
    if n.extra is not None:
        extra = {"neighbors": sorted(n.extra.neighbors)}
    # dict insertion order fixes the field order
    doc = {
        "producer": n.producer,
        "seq": n.seq,
        "created_at": n.created_at,
        "triples": [[t.name1, t.name2, _encode_value(t.value)] for t in n.triples],
        "extra": extra,
    }
    return json.dumps(doc, separators=(",", ":"))


def parse(line: str) -> Notification:
    doc = json.loads(line)
    triples = tuple(AttributeTriple(a, b, _decode_value(v)) for a, b, v in doc["triples"])
    extra = doc.get("extra")
    if extra is not None:
        extra = ExtraLocationInfo(frozenset(extra["neighbors"]))
    return Notification(doc["producer"], doc["seq"], doc["created_at"], triples, extra)
