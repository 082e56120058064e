"""Producer positions over time: ns-2 movement ingestion and random-waypoint synthesis."""

from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import NonMonotonicTime, ParseError, TimeBeyondDuration, TraceError, UnknownProducer
from .grid import CellGrid, Position


@dataclass(frozen=True)
class WaypointParams:
    speed_range: tuple = (0.9, 1.5)  # m/s
    pause_range: tuple = (10.0, 50.0)  # s
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise ValueError("speed range must satisfy 0 < min <= max")
        lo, hi = self.pause_range
        if not 0 <= lo <= hi:
            raise ValueError("pause range must satisfy 0 <= min <= max")


@dataclass
class TraceSet:
    """Piecewise-linear tracks. Waypoint times are float milliseconds."""

    times: dict  # producer -> list[float]
    xs: dict
    ys: dict
    duration: int
    # sampled leg parameters, only filled by synthesize()
    speeds: dict = field(default_factory=dict)
    pauses: dict = field(default_factory=dict)

    @property
    def producers(self):
        return sorted(self.times)

    def waypoints(self, pid):
        return list(zip(self.times[pid], (Position(x, y) for x, y in zip(self.xs[pid], self.ys[pid]))))

    def clamped(self, grid: CellGrid) -> "TraceSet":
        xs, ys = {}, {}
        for pid in self.times:
            pts = [grid.clamp((x, y)) for x, y in zip(self.xs[pid], self.ys[pid])]
            xs[pid] = [p.x for p in pts]
            ys[pid] = [p.y for p in pts]
        return TraceSet(dict(self.times), xs, ys, self.duration, self.speeds, self.pauses)

    def positions_at(self, when) -> np.ndarray:
        """All producers' positions at ``when`` as an (n, 2) array ordered by producer id."""
        out = np.empty((len(self.times), 2))
        for i, pid in enumerate(self.producers):
            out[i] = _interp(self.times[pid], self.xs[pid], self.ys[pid], when)
        return out


def _interp(ts, xs, ys, when):
    k = bisect_right(ts, when) - 1
    if k < 0:
        return xs[0], ys[0]
    if k >= len(ts) - 1:
        return xs[-1], ys[-1]
    t0, t1 = ts[k], ts[k + 1]
    f = (when - t0) / (t1 - t0)
    return xs[k] + f * (xs[k + 1] - xs[k]), ys[k] + f * (ys[k + 1] - ys[k])


def position_at(trace: TraceSet, pid: int, when) -> Position:
    if pid not in trace.times:
        raise UnknownProducer(f"producer {pid} not in trace")
    if when > trace.duration:
        raise TimeBeyondDuration(f"t={when} ms beyond trace duration {trace.duration} ms")
    return Position(*_interp(trace.times[pid], trace.xs[pid], trace.ys[pid], when))


# -- ns-2 movement files -------------------------------------------------------

_SET_RE = re.compile(r"^\$node_\((\d+)\)\s+set\s+([XYZ])_\s+(\S+)$")
_DEST_RE = re.compile(
    r'^\$ns_\s+at\s+(\S+)\s+"\$node_\((\d+)\)\s+setdest\s+(\S+)\s+(\S+)\s+(\S+)"$'
)


def _num(text, lineno):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", lineno)
    return v


class _Track:
    def __init__(self):
        self.x = None
        self.y = None
        self.ts = []
        self.xs = []
        self.ys = []
        self.last_cmd = -math.inf
        # current leg: (start_t, start_xy, dest_xy, arrival_t)
        self.leg = None

    def pos_at(self, t):
        if self.leg is None:
            return self.xs[-1], self.ys[-1]
        t0, (x0, y0), (x1, y1), t1 = self.leg
        if t >= t1 or t1 == t0:
            return x1, y1
        f = (t - t0) / (t1 - t0)
        return x0 + f * (x1 - x0), y0 + f * (y1 - y0)

    def add(self, t, xy):
        if self.ts and t == self.ts[-1]:
            self.xs[-1], self.ys[-1] = xy
            return
        self.ts.append(t)
        self.xs.append(xy[0])
        self.ys.append(xy[1])

    def setdest(self, t, dest, speed):
        if self.leg is not None:
            _, _, end, t1 = self.leg
            if t >= t1:
                self.add(t1, end)
        here = self.pos_at(t)
        self.add(t, here)
        dist = math.hypot(dest[0] - here[0], dest[1] - here[1])
        if speed <= 0 or dist == 0:
            self.leg = None
            return
        self.leg = (t, here, dest, t + dist / speed * 1000.0)

    def finish(self):
        if self.leg is not None:
            _, _, dest, t1 = self.leg
            self.add(t1, dest)
            self.leg = None
        return self.ts[-1]


def load_trace(path) -> TraceSet:
    """Parse the ns-2 movement subset (``set X_/Y_`` and ``setdest``). Z is ignored."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise TraceError(f"cannot read trace {path}: {e.strerror}") from None
    tracks: dict[int, _Track] = {}
    commands = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("$god_"):
            continue
        m = _SET_RE.match(line)
        if m:
            node, axis, val = int(m.group(1)), m.group(2), _num(m.group(3), lineno)
            tr = tracks.setdefault(node, _Track())
            if axis == "X":
                tr.x = val
            elif axis == "Y":
                tr.y = val
            continue
        m = _DEST_RE.match(line)
        if m:
            t = _num(m.group(1), lineno)
            node = int(m.group(2))
            x, y, speed = (_num(m.group(i), lineno) for i in (3, 4, 5))
            if t < 0 or speed < 0:
                raise ParseError("negative time or speed", lineno)
            commands.append((lineno, node, t * 1000.0, (x, y), speed))
            continue
        raise ParseError(f"unrecognised line {line!r}", lineno)

    if not tracks:
        raise ParseError("no nodes defined")
    ids = sorted(tracks)
    if ids != list(range(len(ids))):
        raise ParseError(f"node indices must be contiguous from 0, got {ids}")
    for node, tr in tracks.items():
        if tr.x is None or tr.y is None:
            raise ParseError(f"node {node} lacks an initial X_/Y_ position")
        tr.add(0.0, (tr.x, tr.y))

    for lineno, node, t, dest, speed in commands:
        if node not in tracks:
            raise ParseError(f"setdest for undeclared node {node}", lineno)
        tr = tracks[node]
        if t < tr.last_cmd:
            raise NonMonotonicTime(f"line {lineno}: node {node} time {t / 1000} s goes backwards")
        tr.last_cmd = t
        tr.setdest(t, dest, speed)

    duration = 0.0
    for tr in tracks.values():
        duration = max(duration, tr.finish())
    out = TraceSet({}, {}, {}, int(math.ceil(duration)))
    for node, tr in tracks.items():
        out.times[node], out.xs[node], out.ys[node] = tr.ts, tr.xs, tr.ys
    return out


def write_trace(trace: TraceSet, path):
    """Write a trace back out as ns-2 setdest commands (one leg per waypoint pair)."""
    lines = []
    for pid in trace.producers:
        lines.append(f"$node_({pid}) set X_ {trace.xs[pid][0]!r}")
        lines.append(f"$node_({pid}) set Y_ {trace.ys[pid][0]!r}")
        lines.append(f"$node_({pid}) set Z_ 0.0")
    for pid in trace.producers:
        ts, xs, ys = trace.times[pid], trace.xs[pid], trace.ys[pid]
        for k in range(len(ts) - 1):
            dist = math.hypot(xs[k + 1] - xs[k], ys[k + 1] - ys[k])
            if dist == 0:
                continue
            speed = dist / ((ts[k + 1] - ts[k]) / 1000.0)
            lines.append(f'$ns_ at {ts[k] / 1000.0!r} "$node_({pid}) setdest {xs[k + 1]!r} {ys[k + 1]!r} {speed!r}"')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# -- random waypoint -----------------------------------------------------------

def synthesize(grid: CellGrid, n_producers: int, duration: int, params: WaypointParams) -> TraceSet:
    """Random waypoint: move to a uniform destination at uniform speed, pause, repeat."""
    if n_producers < 1:
        raise ValueError("need at least one producer")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([params.seed, 0x6D6F62])))
    x0, y0 = grid.origin
    w, h = grid.width, grid.height
    smin, smax = params.speed_range
    pmin, pmax = params.pause_range
    out = TraceSet({}, {}, {}, int(duration))

    def point():
        return grid.clamp((x0 + rng.random() * w, y0 + rng.random() * h))

    for pid in range(n_producers):
        px, py = point()
        ts, xs, ys = [0.0], [px], [py]
        speeds, pauses = [], []
        t = 0.0
        while t <= duration:
            nx, ny = point()
            speed = smin + rng.random() * (smax - smin)
            dist = math.hypot(nx - px, ny - py)
            if dist > 0:
                t += dist / speed * 1000.0
                ts.append(t)
                xs.append(nx)
                ys.append(ny)
                speeds.append(speed)
            px, py = nx, ny
            pause = pmin + rng.random() * (pmax - pmin)
            pauses.append(pause)
            if pause > 0:
                t += pause * 1000.0
                ts.append(t)
                xs.append(px)
                ys.append(py)
        out.times[pid], out.xs[pid], out.ys[pid] = ts, xs, ys
        out.speeds[pid], out.pauses[pid] = speeds, pauses
    return out
