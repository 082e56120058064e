"""Deterministic discrete-event core plus the abstract radio and uplink."""

from __future__ import annotations

import heapq
import zlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .errors import NoBrokerAssigned, SchedulingInPast


class EventKind(Enum):
    BEACON = "Beacon"
    PUBLISH = "Publish"
    POLL_DEADLINE = "PollDeadline"
    CONNECTION_TIMEOUT = "ConnectionTimeout"
    REGISTRY_EXCHANGE = "RegistryExchange"
    TRACE_SAMPLE = "TraceSample"
    WARMUP_END = "WarmupEnd"
    DELIVER = "Deliver"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    target: Any = None
    payload: Any = None


class EventQueue:
    """Fires events in (fire_at, insertion order); the clock never runs backwards."""

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0

    def __len__(self):
        return len(self._heap)

    def schedule(self, at, event):
        if at < self.now:
            raise SchedulingInPast(f"cannot schedule at {at} ms, clock is at {self.now} ms")
        heapq.heappush(self._heap, (at, self._seq, event))
        self._seq += 1

    def peek_time(self):
        return self._heap[0][0] if self._heap else None

    def pop(self):
        at, _, event = heapq.heappop(self._heap)
        self.now = at
        return at, event


def schedule(q: EventQueue, at, e: Event) -> None:
    q.schedule(at, e)


# -- random streams --------------------------------------------------------------

class RngStream:
    """Named, independent substreams derived from one 64-bit seed.

    Substream identity is the CRC32 of its name, so adding a new substream
    never perturbs existing ones.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._streams = {}

    def __getitem__(self, name) -> np.random.Generator:
        gen = self._streams.get(name)
        if gen is None:
            ss = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])
            gen = np.random.Generator(np.random.PCG64(ss))
            self._streams[name] = gen
        return gen


# -- radio ----------------------------------------------------------------------------

@dataclass
class RadioModel:
    range: float = 100.0
    loss_prob: float = 0.0
    rng: np.random.Generator | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must lie in [0, 1]")

    def received(self):
        """One independent loss draw for one (message, receiver) reception."""
        if self.loss_prob == 0.0:
            return True
        if self.loss_prob == 1.0:
            return False
        return bool(self.rng.random() >= self.loss_prob)

    def received_many(self, n):
        if self.loss_prob == 0.0:
            return np.ones(n, dtype=bool)
        if self.loss_prob == 1.0:
            return np.zeros(n, dtype=bool)
        return self.rng.random(n) >= self.loss_prob


def in_range(r: RadioModel, a, b) -> bool:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return dx * dx + dy * dy <= r.range * r.range


def in_range_matrix(r: RadioModel, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Boolean (len(src), len(dst)) reachability, same inclusive rule as in_range."""
    d = src[:, None, :] - dst[None, :, :]
    return (d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1]) <= r.range * r.range


def broadcast_shortrange(r: RadioModel, origin, msg, receivers):
    """Return the ids from ``receivers`` [(id, position), ...] that hear ``msg``.

    Loss draws happen only for in-range receivers, in the order given.
    """
    heard = set()
    for rid, pos in receivers:
        if in_range(r, origin, pos) and r.received():
            heard.add(rid)
    return heard


@dataclass
class Uplink:
    """Wide-area link: lossless with constant latency."""

    latency_ms: int = 50
    sent: int = 0

    def send(self, q: EventQueue, now, msg, broker, handler):
        if broker is None:
            raise NoBrokerAssigned("producer has no access broker")
        self.sent += 1
        q.schedule(now + self.latency_ms, Event(EventKind.DELIVER, broker, (msg, handler)))
        return now + self.latency_ms


def uplink_send(link: Uplink, q: EventQueue, now, msg, broker, handler=None):
    return link.send(q, now, msg, broker, handler)
