import string

import pytest
from hypothesis import given, strategies as st

from fogcert.errors import AlreadyCertified, MissingFlag, MissingLocation
from fogcert.model import (
    CERTIFIED, COLLAB_DECIDED, LOCATION, VALUE, AttributeTriple, CellId, ExtraLocationInfo, Notification,
    certify, get_location_claim, make_notification, parse, read_collab_flag, serialize,
)


def test_claim_read():
    n = make_notification(1, 0, 0, CellId(2, 1))
    assert get_location_claim(n) == CellId(2, 1)


def test_claim_selected_among_triples():
    n = make_notification(1, 0, 0, CellId(0, 0), payload=[AttributeTriple("noise", "value", "68 dB")])
    assert get_location_claim(n) == CellId(0, 0)
    assert len(n.triples) == 2


def test_missing_claim():
    n = Notification(1, 0, 0, (AttributeTriple("noise", "value", 3),))
    with pytest.raises(MissingLocation):
        get_location_claim(n)


@pytest.mark.parametrize("verdict", [True, False])
def test_certify_inserts_triple(verdict):
    n = make_notification(1, 0, 0, CellId(0, 0), ExtraLocationInfo(frozenset({4})))
    out = certify(n, verdict)
    assert out.get(LOCATION, CERTIFIED) is verdict
    assert out.extra is None
    assert get_location_claim(out) == CellId(0, 0)
    # the input is a value and stays untouched
    assert not n.has(LOCATION, CERTIFIED)


def test_certify_twice_rejected():
    n = certify(make_notification(1, 0, 0, CellId(0, 0)), True)
    with pytest.raises(AlreadyCertified):
        certify(n, False)


def test_certify_strips_collab_flag():
    n = make_notification(1, 0, 0, CellId(0, 0)).with_triple(LOCATION, COLLAB_DECIDED, True)
    out = certify(n, True)
    assert not out.has(LOCATION, COLLAB_DECIDED)


def test_collab_flag_missing():
    with pytest.raises(MissingFlag):
        read_collab_flag(make_notification(1, 0, 0, CellId(0, 0)))


def test_duplicate_triple_rejected():
    t = AttributeTriple(LOCATION, VALUE, CellId(0, 0))
    with pytest.raises(ValueError):
        Notification(1, 0, 0, (t, t))


def test_serialize_field_order():
    n = make_notification(3, 7, 1500, CellId(1, 2), ExtraLocationInfo(frozenset({9, 2})),
                          payload=[AttributeTriple("noise", "value", 68)])
    line = serialize(n)
    assert line.index('"producer"') < line.index('"seq"') < line.index('"created_at"') < line.index('"triples"') \
        < line.index('"extra"')
    # triples sorted by (name1, name2): location < noise
    assert line.index('"location"') < line.index('"noise"')
    assert '"neighbors":[2,9]' in line


cells = st.builds(CellId, st.integers(0, 50), st.integers(0, 50))
values = st.one_of(st.text(string.printable, max_size=8), st.integers(-10**6, 10**6), st.booleans(), cells)
names = st.sampled_from(["noise", "temp", "battery", "mode"])


@st.composite
def notifications(draw):
    payload = draw(st.dictionaries(st.tuples(names, st.sampled_from(["value", "unit"])), values, max_size=4))
    triples = [AttributeTriple(a, b, v) for (a, b), v in payload.items()]
    extra = draw(st.one_of(st.none(), st.builds(ExtraLocationInfo, st.frozensets(st.integers(0, 500), max_size=6))))
    n = make_notification(draw(st.integers(0, 10**4)), draw(st.integers(0, 10**6)), draw(st.integers(0, 10**8)),
                          draw(cells), extra, triples)
    if draw(st.booleans()):
        n = certify(n, draw(st.booleans()))
    return n


@given(notifications())
def test_serialize_round_trip(n):
    assert parse(serialize(n)) == n


@given(notifications())
def test_exactly_one_claim(n):
    assert sum(1 for t in n.triples if t.key == (LOCATION, VALUE)) == 1
    assert sum(1 for t in n.triples if t.key == (LOCATION, CERTIFIED)) <= 1
