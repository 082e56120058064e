import pytest

from fogcert.errors import UnknownScenario
from fogcert.scenarios import SCENARIOS, scenario, tracks


def test_fig7_outcomes():
    res = scenario("fig7")
    assert [res.outcome(p) for p in range(4)] == ["lost", "uncertified-true", "queued", "lost"]
    assert res.report.identity_errors() == []


def test_lonely_cls_certifies_the_lie():
    r = scenario("lonely-cls").report
    assert (r.published, r.published_false, r.df_cert) == (1, 1, 1)


def test_liar_corrected():
    res = scenario("liar-corrected")
    assert res.report.false_to_true == 1
    assert res.outcome(0) == "certified-true"


def test_edge_tie_is_uncertified():
    res = scenario("edge-tie")
    assert res.report.dt_uncert == 1
    assert res.outcome(0) == "uncertified-true"


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenarios_are_deterministic_and_oracle_clean(name):
    a, b = scenario(name), scenario(name)
    assert a.report == b.report
    assert [x.as_row() for x in a.audit] == [x.as_row() for x in b.audit]
    assert a.sim.oracle_failures == []


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        scenario("fig8")


def test_tracks_must_start_at_zero():
    with pytest.raises(ValueError):
        tracks(1000, [[(5, 0, 0)]])
