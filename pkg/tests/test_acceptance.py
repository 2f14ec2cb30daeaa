"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are repeated in the terminal summary either way. Tolerances and
time budgets are pinned below and are never relaxed to make a run pass.
"""
import os
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import (build_all, criterion, induced_pairs, load_fixture, pairwise_loc_ea,
                      pairwise_loc_profile, small_instance)
from ptlabel.cli import random_queries, run_bench
from ptlabel.graph import build_ea_graph, build_mc_graph
from ptlabel.labeling import (DISTANCE, REACHABILITY, LabelStoreError, build_labels,
                              serialize_labels)
from ptlabel.oracle import (brute_profile, dijkstra, dijkstra_ea, mc_dijkstra,
                            reachability_bfs)
from ptlabel.query import (EaVariantFlags, dist_label_query, ea_query, mc_query,
                           profile_event_labels, profile_stop_labels, reach_label_query)
from ptlabel.store import BuildConfig, LabelStore
from ptlabel.superlabel import LocationAccess, loc_ea_query, loc_profile_query
from ptlabel.synth import generate_timetable
from ptlabel.timetable import (INFINITY, shift_arrivals_for_mtt_mc, split_stops_for_mtt_ea,
                               with_mtt)

pytestmark = pytest.mark.acceptance

# instance envelopes
N_EA_INSTANCES, N_EA_QUERIES = 30, 2000
N_MC_INSTANCES, N_MC_QUERIES = 10, 500
N_COVER_INSTANCES, MAX_COVER_EVENTS = 10, 500
N_TIGHT_RANDOM = 5
N_LOC_RANDOM = 10
PERF_STOPS, PERF_TRIPS, PERF_SEED, PERF_MIN_CONNECTIONS = 1000, 5000, 1, 50_000
PERF_EA_QUERIES, PERF_PROFILE_QUERIES = 2000, 200

# time budgets, seconds
BUDGET_EA = 60.0
BUDGET_PROFILE = 120.0
BUDGET_MC = 120.0
BUDGET_COVER = 60.0

# performance envelopes
MAX_EA_LATENCY_S = 1e-3
MAX_PROFILE_LATENCY_S = 20e-3
MAX_BUILD_S = 600.0


@lru_cache(maxsize=None)
def _ea_built(seed):
    tt = small_instance(seed)
    return build_all(tt, mc=False)


def _within_envelope(tt):
    return tt.n_stops <= 60 and tt.n_trips <= 150 and len(tt.fp_from) <= 2 * 10


def _is_pareto(profile):
    deps = [e.departure for e in profile]
    arrs = [e.arrival for e in profile]
    # sorted by departure; strictly increasing in both means nothing dominates
    return all(a < b for a, b in zip(deps, deps[1:])) and all(a < b for a, b in zip(arrs, arrs[1:]))


@pytest.fixture(scope="module")
def perf_store():
    tt = generate_timetable(PERF_STOPS, PERF_TRIPS, seed=PERF_SEED)
    t0 = time.perf_counter()
    store = LabelStore.build(tt)
    return store, time.perf_counter() - t0


# -- 1 ----------------------------------------------------------------------

def test_criterion_01_ea_oracle_equivalence():
    variants = EaVariantFlags.all_variants()
    with criterion(1, "EA answers equal dijkstra_ea, 8 flag sets x 2 engines", "exact") as c:
        t0 = time.perf_counter()
        mismatches = checked = 0
        for seed in range(N_EA_INSTANCES):
            b = _ea_built(seed)
            assert _within_envelope(b.tt)
            memo = {}
            for q in random_queries(b.tt, N_EA_QUERIES, seed):
                want = dijkstra_ea(b.g, q, memo).arrival
                for flags in variants:
                    got = ea_query(q, flags, ls=b.ls, sls=b.sls, tt=b.tt).arrival
                    checked += 1
                    mismatches += got != want
        elapsed = time.perf_counter() - t0
        c.note(f"{checked} answers, {mismatches} mismatches, budget {BUDGET_EA:.0f}s")
        assert mismatches == 0
        assert elapsed < BUDGET_EA


# -- 2 ----------------------------------------------------------------------

def test_criterion_02_profile_oracle_equivalence():
    with criterion(2, "all-pairs profiles equal brute_profile and are Pareto", "exact") as c:
        t0 = time.perf_counter()
        pairs = bad = not_pareto = 0
        for seed in range(N_EA_INSTANCES):
            b = _ea_built(seed)
            memo = {}
            n = b.tt.n_stops
            for s in range(n):
                for t in range(n):
                    want = brute_profile(b.g, s, t, memo)
                    ev = profile_event_labels(s, t, b.ls, b.tt)
                    st = profile_stop_labels(s, t, b.sls)
                    pairs += 1
                    bad += set(ev) != set(want) or set(st) != set(want)
                    not_pareto += not _is_pareto(ev) or not _is_pareto(st)
        elapsed = time.perf_counter() - t0
        c.note(f"{pairs} pairs, {bad} mismatches, {not_pareto} non-Pareto, "
               f"budget {BUDGET_PROFILE:.0f}s")
        assert bad == 0 and not_pareto == 0
        assert elapsed < BUDGET_PROFILE


# -- 3 ----------------------------------------------------------------------

def test_criterion_03_mc_oracle_equivalence():
    with criterion(3, "MC Pareto sets equal mc_dijkstra, strict ordering", "exact") as c:
        t0 = time.perf_counter()
        bad = unordered = total = 0
        for seed in range(N_MC_INSTANCES):
            tt = small_instance(seed)
            gm = build_mc_graph(tt)
            dls = build_labels(gm, DISTANCE)
            memo = {}
            for q in random_queries(tt, N_MC_QUERIES, seed):
                want = mc_dijkstra(gm, q, memo).entries
                for pruning in (True, False):
                    got = mc_query(q, dls, tt, pruning=pruning).entries
                    total += 1
                    bad += got != want
                    arr = [a for a, _ in got]
                    tr = [x for _, x in got]
                    unordered += not (all(a < b for a, b in zip(arr, arr[1:]))
                                      and all(a > b for a, b in zip(tr, tr[1:])))
        elapsed = time.perf_counter() - t0
        c.note(f"{total} answers, {bad} mismatches, {unordered} badly ordered, "
               f"budget {BUDGET_MC:.0f}s")
        assert bad == 0 and unordered == 0
        assert elapsed < BUDGET_MC


# -- 4 ----------------------------------------------------------------------

def _inverted(offsets, hubs, vals=None):
    """hub -> (vertices, values) for one label side."""
    owner = np.repeat(np.arange(offsets.size - 1), np.diff(offsets))
    order = np.argsort(hubs, kind="stable")
    h = hubs[order]
    cuts = np.flatnonzero(np.diff(h)) + 1
    keys = h[np.r_[0, cuts]] if h.size else h
    groups_v = np.split(owner[order], cuts) if h.size else []
    groups_d = np.split(vals[order], cuts) if (h.size and vals is not None) else [None] * len(keys)
    return {int(k): (v, d) for k, v, d in zip(keys, groups_v, groups_d)}


def _cover_instances():
    out, seed = [], 0
    while len(out) < N_COVER_INSTANCES:
        tt = small_instance(seed)
        if tt.n_events <= MAX_COVER_EVENTS:
            out.append(tt)
        seed += 1
    return out


def test_criterion_04_cover_property():
    with criterion(4, "label cover: reachability = BFS, distance = Dijkstra, all pairs",
                   "exact") as c:
        t0 = time.perf_counter()
        rng = np.random.default_rng(4)
        pairs = bad = 0
        for tt in _cover_instances():
            # reachability on the EA graph
            g = build_ea_graph(tt)
            ls = build_labels(g, REACHABILITY, keep_all=True)
            back = _inverted(ls.bwd_offsets, ls.bwd_hubs)
            n = g.n_vertices
            for u in range(n):
                via = np.zeros(n, bool)
                for h in ls.forward(u).tolist():
                    if h in back:
                        via[back[h][0]] = True
                want = np.zeros(n, bool)
                want[list(reachability_bfs(g, u))] = True
                bad += int((via != want).sum())
                pairs += n
            # spot checks through the query function itself
            for u, v in rng.integers(0, n, size=(200, 2)).tolist():
                bad += reach_label_query(u, v, ls)[0] != (v in reachability_bfs(g, u))

            # distances on the MC graph
            gm = build_mc_graph(tt)
            dls = build_labels(gm, DISTANCE, keep_all=True)
            back = _inverted(dls.bwd_offsets, dls.bwd_hubs, dls.bwd_dists)
            n = gm.n_vertices
            for u in range(n):
                got = np.full(n, INFINITY, np.int64)
                for h, d in zip(dls.forward(u).tolist(), dls.forward_dists(u).tolist()):
                    if h in back:
                        vs, ds = back[h]
                        np.minimum.at(got, vs, ds + d)
                want = np.full(n, INFINITY, np.int64)
                for v, d in dijkstra(gm, u).items():
                    want[v] = d
                bad += int((got != want).sum())
                pairs += n
            for u, v in rng.integers(0, n, size=(200, 2)).tolist():
                bad += dist_label_query(u, v, dls) != dijkstra(gm, u).get(v, INFINITY)
        elapsed = time.perf_counter() - t0
        c.note(f"{pairs} vertex pairs, {bad} mismatches, budget {BUDGET_COVER:.0f}s")
        assert bad == 0
        assert elapsed < BUDGET_COVER


# -- 5 ----------------------------------------------------------------------

def test_criterion_05_tight_journey_cover():
    with criterion(5, "every tight journey has a hub in SL_f(s) & SL_b(t) inducing it",
                   "exact") as c:
        timetables = [load_fixture(x) for x in "abc"]
        timetables += [small_instance(100 + i) for i in range(N_TIGHT_RANDOM)]
        journeys = missing = 0
        for tt in timetables:
            b = build_all(tt, mc=False)
            memo = {}
            for s in range(tt.n_stops):
                for t in range(tt.n_stops):
                    induced = set(induced_pairs(b.sls, s, t).values())
                    for e in brute_profile(b.g, s, t, memo):
                        journeys += 1
                        missing += (e.departure, e.arrival) not in induced
        c.note(f"{len(timetables)} timetables, {journeys} tight journeys, {missing} uncovered")
        assert journeys > 0 and missing == 0


# -- 6 ----------------------------------------------------------------------

def test_criterion_06_stop_label_economics():
    with criterion(6, "forward stop-label hubs < untrimmed forward event-label hubs",
                   "strict <") as c:
        ratios = []
        timetables = [load_fixture("b")] + [small_instance(i) for i in range(5)]
        timetables.append(generate_timetable(300, 1000, seed=1))
        for tt in timetables:
            b = build_all(tt, mc=False)
            event_hubs, stop_hubs = int(b.ls.fwd_hubs.size), int(b.sls.fwd_hubs.size)
            assert stop_hubs < event_hubs
            ratios.append(event_hubs / stop_hubs)
        # magnitude is reported, not asserted
        c.note("event/stop forward hubs " + ", ".join(f"{r:.2f}" for r in ratios))


# -- 7 ----------------------------------------------------------------------

def _bench_stores(perf):
    stores = [(f"fixture-{x}", LabelStore.build(load_fixture(x))) for x in "abcd"]
    stores += [(f"small-{i}", LabelStore.build(small_instance(i))) for i in range(5)]
    stores.append(("300x1000", LabelStore.build(generate_timetable(300, 1000, seed=1))))
    stores.append(("perf", perf))
    return stores


def test_criterion_07_variant_monotonicity(perf_store):
    with criterion(7, "pruning never adds work per query; binary search never adds "
                   "labels on bench means", "0 violations") as c:
        violations, runs = [], 0
        for name, store in _bench_stores(perf_store[0]):
            report = run_bench(store, 1000, seed=0)
            runs += 1
            if report["pruning_violations"]:
                violations.append(f"{name}: pruning on {report['pruning_violations']} queries")
            rows = {(r["engine"], r["pruning"], r["hashing"], r["binary_search"]): r
                    for r in report["variants"]}
            for (engine, pruning, hashing, binary), r in rows.items():
                if binary:
                    lin = rows[(engine, pruning, hashing, False)]
                    if r["labels_scanned"] > lin["labels_scanned"]:
                        violations.append(f"{name}: {r['variant']} "
                                          f"{r['labels_scanned']:.3f} > {lin['labels_scanned']:.3f}")
        c.note(f"{runs} bench runs, {len(violations)} violations")
        assert not violations, violations


# -- 8 ----------------------------------------------------------------------

def test_criterion_08_transfer_times():
    with criterion(8, "split-stop EA and shifted MC equal their oracles; mtt=0 is a no-op",
                   "exact, bytes identical") as c:
        ea_bad = mc_bad = split_stops = 0
        variants = EaVariantFlags.all_variants()
        for seed in range(5):
            tt = generate_timetable(40, 100, seed=seed, mtt_max=300)
            split = split_stops_for_mtt_ea(tt)
            split_stops += split.n_stops - tt.n_stops
            b = build_all(split, mc=False)
            memo = {}
            for q in random_queries(split, 500, seed):
                want = dijkstra_ea(b.g, q, memo).arrival
                for flags in variants:
                    ea_bad += ea_query(q, flags, ls=b.ls, sls=b.sls, tt=split).arrival != want
            shifted = shift_arrivals_for_mtt_mc(tt)
            gm = build_mc_graph(shifted)
            dls = build_labels(gm, DISTANCE)
            memo = {}
            for q in random_queries(shifted, 300, seed):
                mc_bad += mc_query(q, dls, shifted).entries != mc_dijkstra(gm, q, memo).entries

            # zero transfer times: same bytes and answers as ignoring them
            zero = LabelStore.build(with_mtt(tt, np.zeros(tt.n_stops, np.int64)))
            plain = LabelStore.build(tt, BuildConfig(mtt="none"))
            for x, y in ((zero.ls, plain.ls), (zero.sls, plain.sls), (zero.dls, plain.dls)):
                assert serialize_labels(x) == serialize_labels(y)
            names = tt.stop_names
            for q in random_queries(tt, 200, seed):
                s, t = names[q.source], names[q.target]
                assert zero.ea(s, t, q.departure).arrival == plain.ea(s, t, q.departure).arrival
                assert zero.mc(s, t, q.departure).entries == plain.mc(s, t, q.departure).entries
        c.note(f"{split_stops} stops split, {ea_bad} EA and {mc_bad} MC mismatches")
        assert split_stops > 0
        assert ea_bad == 0 and mc_bad == 0


# -- 9 ----------------------------------------------------------------------

def _random_access(rng, n_stops):
    k = int(rng.integers(2, 7))
    stops = rng.choice(n_stops, size=min(k, n_stops), replace=False).tolist()
    cut = max(1, len(stops) // 2)
    walk = lambda: int(rng.integers(0, 601))
    return (LocationAccess([(p, walk()) for p in stops[:cut]]),
            LocationAccess([(p, walk()) for p in stops[cut:]]))


def test_criterion_09_superlabels():
    with criterion(9, "location queries equal min/Pareto over pairwise stop queries",
                   "exact") as c:
        cases = []
        d = load_fixture("d")
        dsrc = LocationAccess.parse("P:60,Q:300", d)
        dtgt = LocationAccess.parse("Z:0", d)
        cases.append((d, [(dsrc, dtgt)]))
        for i in range(N_LOC_RANDOM):
            tt = small_instance(200 + i)
            rng = np.random.default_rng(i)
            cases.append((tt, [_random_access(rng, tt.n_stops) for _ in range(20)]))
        checked = bad = 0
        for tt, pairs in cases:
            b = build_all(tt, mc=False)
            memo = {}
            last = tt.last_event_time()
            for src, dst in pairs:
                taus = [0, 100, 401] + np.random.default_rng(checked).integers(
                    0, last + 1, size=5).tolist()
                for tau in taus:
                    want = pairwise_loc_ea(b.g, src, dst, tau, memo)
                    for pruning in (True, False):
                        checked += 1
                        bad += loc_ea_query(src, dst, tau, b.sls, pruning=pruning).arrival != want
                want, _ = pairwise_loc_profile(b.g, src, dst, memo)
                got = loc_profile_query(src, dst, b.sls)
                checked += 1
                bad += [(e.departure, e.arrival) for e in got] != want
        c.note(f"{checked} answers, {bad} mismatches")
        assert bad == 0


# -- 10 ---------------------------------------------------------------------

def test_criterion_10_performance(perf_store):
    store, build_s = perf_store
    with criterion(10, "1000 stops / 50k connections: EA < 1 ms, profile < 20 ms, "
                   "build < 10 min", "mean latency") as c:
        tt = store.ea_tt
        assert store.tt.n_connections >= PERF_MIN_CONNECTIONS
        flags = EaVariantFlags(True, True, True)
        queries = random_queries(tt, PERF_EA_QUERIES, seed=10)
        for q in queries[:20]:
            ea_query(q, flags, ls=store.ls, sls=store.sls, tt=tt)
        t0 = time.perf_counter()
        for q in queries:
            ea_query(q, flags, ls=store.ls, sls=store.sls, tt=tt)
        ea_s = (time.perf_counter() - t0) / len(queries)

        pairs = [(q.source, q.target) for q in random_queries(tt, PERF_PROFILE_QUERIES, 11)]
        profile_event_labels(*pairs[0], store.ls, tt)
        profile_stop_labels(*pairs[0], store.sls)
        t0 = time.perf_counter()
        for s, t in pairs:
            profile_event_labels(s, t, store.ls, tt)
        prof_event_s = (time.perf_counter() - t0) / len(pairs)
        t0 = time.perf_counter()
        for s, t in pairs:
            profile_stop_labels(s, t, store.sls)
        prof_stop_s = (time.perf_counter() - t0) / len(pairs)
        c.note(f"{store.tt.n_connections} connections, EA {ea_s * 1e6:.1f}us, profile "
               f"{prof_event_s * 1e3:.2f}ms (event) {prof_stop_s * 1e3:.2f}ms (stop), "
               f"build {build_s:.0f}s")
        assert ea_s < MAX_EA_LATENCY_S
        assert prof_event_s < MAX_PROFILE_LATENCY_S and prof_stop_s < MAX_PROFILE_LATENCY_S
        assert build_s < MAX_BUILD_S


# -- 11 ---------------------------------------------------------------------

def _files(path):
    return {name: (path / name).read_bytes() for name in sorted(os.listdir(path))}


def test_criterion_11_determinism_and_serialization(tmp_path):
    with criterion(11, "byte-identical rebuilds, identity round-trip, corruption rejected",
                   "bytes identical") as c:
        tt = generate_timetable(60, 150, seed=11, mtt_max=120)
        a, b, again = tmp_path / "a", tmp_path / "b", tmp_path / "again"
        LabelStore.build(tt).save(a)
        LabelStore.build(tt).save(b)
        assert _files(a) == _files(b)

        loaded = LabelStore.load(a)
        loaded.save(again)
        assert _files(again) == _files(a)
        for x, y in ((loaded.ls, LabelStore.load(b).ls), (loaded.dls, LabelStore.load(b).dls)):
            assert serialize_labels(x) == serialize_labels(y)

        rejected = 0
        for name in ("ea.ptlb", "stops.ptlb", "mc.ptlb"):
            for how in ("flip", "truncate"):
                bad = tmp_path / f"bad-{name}-{how}"
                bad.mkdir()
                for fname, data in _files(a).items():
                    if fname == name:
                        if how == "flip":
                            data = data[:60] + bytes([data[60] ^ 0x01]) + data[61:]
                        else:
                            data = data[:-3]
                    (bad / fname).write_bytes(data)
                with pytest.raises(LabelStoreError):
                    LabelStore.load(bad)
                rejected += 1
        c.note(f"{len(_files(a))} files per store, {rejected} corrupted stores rejected")
