import numpy as np
import pytest

from conftest import built_small, load_fixture, make_graph
from ptlabel import oracle
from ptlabel.graph import build_ea_graph, build_mc_graph
from ptlabel.query import EaQuery, ProfileEntry
from ptlabel.timetable import INFINITY


def test_bfs_arcless_and_chain():
    assert oracle.reachability_bfs(make_graph([1, 2, 3], []), 1) == {1}
    chain = make_graph([1, 2, 3, 4], [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
    assert oracle.reachability_bfs(chain, 1) == {1, 2, 3}


def test_bfs_fixture_a_spot_pairs():
    tt = load_fixture("a")
    g = build_ea_graph(tt)
    ev = {(tt.stop_names[tt.event_stop[e]], int(tt.event_time[e])): e for e in range(tt.n_events)}
    reach = oracle.reachability_bfs(g, ev["A", 60])
    # t1 to B, walk to C@480, t2 to D@540
    assert {ev["B", 300], ev["C", 480], ev["D", 540], ev["D", 660]} <= reach
    assert ev["C", 400] in reach
    assert ev["A", 240] in reach
    assert oracle.reachability_bfs(g, ev["A", 240]) == {ev["A", 240], ev["C", 500], ev["D", 660]}


def test_dijkstra_ea_fixture_a():
    g = build_ea_graph(load_fixture("a"))
    assert oracle.dijkstra_ea(g, EaQuery(0, 3, 0)).arrival == 540
    assert oracle.dijkstra_ea(g, EaQuery(0, 0, 77)).arrival == 77
    assert oracle.dijkstra_ea(g, EaQuery(0, 3, 1000)).arrival == INFINITY


def test_brute_profile_and_guard(monkeypatch):
    g = build_ea_graph(load_fixture("a"))
    assert oracle.brute_profile(g, 0, 3) == [ProfileEntry(60, 540), ProfileEntry(240, 660)]
    assert oracle.brute_profile(g, 3, 0) == []
    monkeypatch.setattr(oracle, "MAX_PROFILE_WORK", 5)
    with pytest.raises(ValueError, match="too large"):
        oracle.brute_profile(g, 0, 3)


def test_mc_dijkstra_fixture_a():
    gm = build_mc_graph(load_fixture("a"))
    assert oracle.mc_dijkstra(gm, EaQuery(0, 3, 0)).entries == [(540, 1), (660, 0)]
    assert oracle.mc_dijkstra(gm, EaQuery(0, 3, 61)).entries == [(660, 0)]


@pytest.mark.parametrize("seed", range(4))
def test_ea_and_mc_oracles_agree(seed):
    b = built_small(seed)
    rng = np.random.default_rng(seed)
    n = b.tt.n_stops
    for _ in range(60):
        q = EaQuery(int(rng.integers(n)), int(rng.integers(n)), int(rng.integers(0, 86400)))
        ea = oracle.dijkstra_ea(b.g, q).arrival
        mc = oracle.mc_dijkstra(b.gm, q).entries
        assert (mc[0][0] if mc else INFINITY) == ea
        arr = [a for a, _ in mc]
        tr = [t for _, t in mc]
        assert arr == sorted(set(arr)) and tr == sorted(set(tr), reverse=True)
