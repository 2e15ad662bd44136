import random

import pytest

from helpers import small_config
from mtrs import validate_instance
from mtrs.errors import ConfigError, GenerationExhausted
from mtrs.generate import (GenConfig, ThreeDM, brute_force_3dm, gen_3dm_hypergraph, gen_interval_instance,
                           gen_road_network, gen_timetable, random_3dm)
from mtrs.hypergraph import downward_closure_violations
from mtrs.model import DriverKind, MatchType, Problem
from mtrs.routing import earliest_arrival_journey


@pytest.fixture(scope="module")
def thirty():
    return gen_interval_instance(small_config(seed=7, riders=30))


def test_agent_counts(thirty):
    assert len(thirty.riders) == 30
    assert len(thirty.designated_drivers) == 30
    assert len(thirty.personal_drivers) == 10


def test_rider_rules(thirty):
    for r in thirty.riders:
        assert r.acceptance_threshold == 0.3
        assert r.transit_baseline >= 1800
        assert 45 * 60 <= r.earliest_departure <= 75 * 60
        assert 45 * 60 <= r.latest_arrival - r.earliest_departure <= 90 * 60
        j = earliest_arrival_journey(thirty.network, thirty.timetable, r.origin, r.destination,
                                     r.earliest_departure)
        assert j.arrive - r.earliest_departure == r.transit_baseline
        assert j.walk_meters <= 4000
        assert j.arrive <= r.latest_arrival


def test_driver_rules(thirty):
    for d in thirty.personal_drivers:
        assert d.kind is DriverKind.PERSONAL
        assert d.capacity in (2, 3)
        assert 30 * 60 <= d.earliest_departure <= 70 * 60
        assert 45 * 60 <= d.latest_arrival - d.earliest_departure <= 70 * 60
        assert d.detour_limit >= 20 * 60
    riders = thirty.rider_by_id
    for g in thirty.designated_drivers:
        assert g.capacity == 3 and g.origin == g.destination
        r = riders[g.paired_rider]
        assert g.match_type is r.match_type


def test_generated_instances_validate():
    for seed in range(3):
        assert validate_instance(gen_interval_instance(small_config(seed=seed))) == []


def test_generation_is_deterministic():
    cfg = small_config(seed=12, riders=8)
    assert gen_interval_instance(cfg, 1800).to_json() == gen_interval_instance(cfg, 1800).to_json()
    assert gen_interval_instance(cfg, 0).to_json() != gen_interval_instance(cfg, 1800).to_json()


def test_both_match_types_appear(thirty):
    types = {r.match_type for r in thirty.riders}
    assert types == {MatchType.FM, MatchType.LM}


def test_timetable_shape():
    cfg = small_config(seed=1)
    net = gen_road_network(cfg)
    tt, stations = gen_timetable(cfg, net, 0)
    assert len(tt.trips) == cfg.lines * 2 * cfg.trips_per_line
    ids = {s.vertex_id for s in stations}
    for t in tt.trips:
        assert len(t.events) >= 3
        assert all(ev.station in ids for ev in t.events)
        assert all(a.departure < b.arrival for a, b in zip(t.events, t.events[1:]))


def test_config_validation():
    with pytest.raises(ConfigError):
        GenConfig(riders=0)
    with pytest.raises(ConfigError):
        GenConfig(zones=(2, 2), departure_weights=[0.5, 0.5, 0.5, 0.5])
    with pytest.raises(ConfigError):
        GenConfig.from_dict({"riders": 3, "colour": "red"})
    cfg = small_config(seed=5)
    assert GenConfig.from_dict(cfg.to_dict()) == cfg


def test_unservable_config_is_reported():
    # a single zone with almost no transit: riders never find a long enough journey
    cfg = small_config(seed=0, n=3, lines=1, station_count=3, zones=(1, 1), max_rejects=20)
    with pytest.raises(GenerationExhausted):
        gen_interval_instance(cfg)


def test_zone_weights_steer_origins():
    w = [0.0] * 9
    w[0] = 1.0
    inst = gen_interval_instance(small_config(seed=3, riders=8, departure_weights=w))
    n = 12
    for r in inst.riders:
        x, y = r.origin.vertex_id % n, r.origin.vertex_id // n
        assert x < 4 and y < 4


# ---- set matching reduction ----------------------------------------------------------

def test_q1_reduction_edges():
    tdm = ThreeDM(1, ["a1", "a2"], ["b1"], ["c1"], [("a1", "b1", "c1")], 3)
    H = gen_3dm_hypergraph(tdm, Problem.MIN_DIST)
    got = {(e.driver, e.riders, e.weight) for e in H.edges}
    assert got == {("a1", ("b1", "c1"), 2), ("a1", ("b1",), 2), ("a1", ("c1",), 2),
                   ("a2", ("b1",), 3), ("a2", ("c1",), 3)}
    unit = gen_3dm_hypergraph(tdm, Problem.MIN_NUM)
    assert {(e.driver, e.riders) for e in unit.edges} == {(d, r) for d, r, _ in got}
    assert {e.weight for e in unit.edges} == {1}


def test_reduction_invariants():
    rng = random.Random(9)
    for _ in range(30):
        tdm = random_3dm(rng, rng.randint(1, 4))
        H = gen_3dm_hypergraph(tdm)
        assert downward_closure_violations(H) == []
        assert all(H.capacities[a] == 2 for a in tdm.A)


def test_brute_force_3dm_examples():
    one = ThreeDM(1, ["a1", "a2"], ["b1"], ["c1"], [("a1", "b1", "c1")])
    assert brute_force_3dm(one) == 1
    q = 3
    A, B, C = [f"a{i}" for i in range(2 * q)], [f"b{i}" for i in range(q)], [f"c{i}" for i in range(q)]
    disjoint = ThreeDM(q, A, B, C, [(A[i], B[i], C[i]) for i in range(q)])
    assert brute_force_3dm(disjoint) == q
    shared = ThreeDM(2, A[:4], B[:2], C[:2], [(A[0], B[0], C[0]), (A[1], B[0], C[1])])
    assert brute_force_3dm(shared) == 1


def test_3dm_validation_and_json():
    with pytest.raises(ConfigError):
        ThreeDM(1, ["a1"], ["b1"], ["c1"], [])
    with pytest.raises(ConfigError):
        ThreeDM(1, ["a1", "a2"], ["b1"], ["c1"], [("a1", "c1", "b1")])
    with pytest.raises(ConfigError):
        ThreeDM(1, ["a1", "a2"], ["b1"], ["c1"], [], omega=1)
    tdm = random_3dm(random.Random(1), 3)
    assert ThreeDM.from_json(tdm.to_json()) == tdm
