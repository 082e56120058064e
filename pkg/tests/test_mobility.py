import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fogcert.errors import NonMonotonicTime, ParseError, TimeBeyondDuration, TraceError, UnknownProducer
from fogcert.grid import CellGrid
from fogcert.mobility import TraceSet, WaypointParams, load_trace, position_at, synthesize, write_trace


def write(tmp_path, text, name="m.tcl"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_setdest_arrival(tmp_path):
    # 50 m at 2 m/s starting at 5 s: arrives at 30 s
    p = write(tmp_path, """
$node_(0) set X_ 10
$node_(0) set Y_ 20
$node_(0) set Z_ 0
$ns_ at 5.0 "$node_(0) setdest 40 60 2.0"
""")
    tr = load_trace(p)
    assert position_at(tr, 0, 0) == (10, 20)
    assert position_at(tr, 0, 5000) == (10, 20)
    assert position_at(tr, 0, 30000) == pytest.approx((40, 60))
    x, y = position_at(tr, 0, 17500)
    assert (x, y) == pytest.approx((25, 40))
    assert tr.duration == 30000


def test_interrupted_leg(tmp_path):
    # the second command redirects the node halfway through the first leg
    p = write(tmp_path, """
$node_(0) set X_ 0
$node_(0) set Y_ 0
$ns_ at 0 "$node_(0) setdest 100 0 10"
$ns_ at 5 "$node_(0) setdest 50 50 10"
""")
    tr = load_trace(p)
    assert position_at(tr, 0, 5000) == pytest.approx((50, 0))
    assert position_at(tr, 0, 10000) == pytest.approx((50, 50))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        load_trace(write(tmp_path, ""))


def test_time_goes_backwards(tmp_path):
    p = write(tmp_path, """
$node_(0) set X_ 0
$node_(0) set Y_ 0
$ns_ at 5.0 "$node_(0) setdest 10 10 1"
$ns_ at 3.0 "$node_(0) setdest 20 20 1"
""")
    with pytest.raises(NonMonotonicTime):
        load_trace(p)


def test_garbage_line_reports_line_number(tmp_path):
    p = write(tmp_path, "$node_(0) set X_ 0\n$node_(0) set Y_ 0\nhello world\n")
    with pytest.raises(ParseError) as e:
        load_trace(p)
    assert e.value.line == 3


def test_non_contiguous_nodes(tmp_path):
    p = write(tmp_path, "$node_(0) set X_ 0\n$node_(0) set Y_ 0\n$node_(2) set X_ 0\n$node_(2) set Y_ 0\n")
    with pytest.raises(ParseError):
        load_trace(p)


def test_missing_file(tmp_path):
    with pytest.raises(TraceError):
        load_trace(tmp_path / "nope.tcl")


def test_position_errors():
    tr = TraceSet({0: [0.0, 10000.0]}, {0: [0.0, 10.0]}, {0: [0.0, 0.0]}, 10000)
    assert position_at(tr, 0, 5000) == (5, 0)
    assert position_at(tr, 0, 0) == (0, 0)
    with pytest.raises(TimeBeyondDuration):
        position_at(tr, 0, 10001)
    with pytest.raises(UnknownProducer):
        position_at(tr, 1, 0)


def test_bad_params():
    with pytest.raises(ValueError):
        WaypointParams(speed_range=(0, 1))
    with pytest.raises(ValueError):
        WaypointParams(pause_range=(5, 1))


def test_synth_deterministic():
    g = CellGrid(400, 400, 200)
    a = synthesize(g, 1, 60000, WaypointParams(seed=7))
    b = synthesize(g, 1, 60000, WaypointParams(seed=7))
    assert a == b
    assert synthesize(g, 1, 60000, WaypointParams(seed=8)) != a


def test_synth_leg_parameters():
    g = CellGrid(1200, 1200, 200)
    tr = synthesize(g, 300, 25_000_000, WaypointParams(seed=3))
    speeds = np.concatenate([tr.speeds[p] for p in tr.producers])
    pauses = np.concatenate([tr.pauses[p] for p in tr.producers])
    assert len(speeds) >= 10_000 and len(pauses) >= 10_000
    assert speeds.min() >= 0.9 and speeds.max() <= 1.5
    assert pauses.min() >= 10.0 and pauses.max() <= 50.0


def test_synth_track_shape():
    g = CellGrid(1200, 1200, 200)
    tr = synthesize(g, 10, 3_600_000, WaypointParams(seed=1))
    for pid in tr.producers:
        ts = tr.times[pid]
        assert ts[0] == 0
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert ts[-1] >= tr.duration
        assert all(g.contains(p) for p in zip(tr.xs[pid], tr.ys[pid]))


def test_write_then_load(tmp_path):
    g = CellGrid(600, 600, 200)
    tr = synthesize(g, 3, 600_000, WaypointParams(seed=5))
    p = tmp_path / "out.tcl"
    write_trace(tr, p)
    back = load_trace(p)
    for t in range(0, 600_000, 7_919):
        for pid in tr.producers:
            assert position_at(back, pid, t) == pytest.approx(position_at(tr, pid, t), abs=1e-6)


SYN = synthesize(CellGrid(1200, 1200, 200), 5, 3_600_000, WaypointParams(seed=11))


@settings(max_examples=300)
@given(st.integers(0, 4), st.integers(0, 3_599_998), st.integers(1, 100_000))
def test_speed_bound(pid, t, dt):
    t2 = min(t + dt, SYN.duration)
    a, b = position_at(SYN, pid, t), position_at(SYN, pid, t2)
    assert math.dist(a, b) <= 1.5 * (t2 - t) / 1000 * (1 + 1e-9) + 1e-9


@settings(max_examples=300)
@given(st.integers(0, 4), st.integers(0, 3_599_998))
def test_continuity(pid, t):
    a, b = position_at(SYN, pid, t), position_at(SYN, pid, t + 1)
    assert math.dist(a, b) <= 1.5 * 0.001 + 1e-9
