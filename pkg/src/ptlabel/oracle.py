"""Slow reference algorithms for checking the label-based engines.

Nothing here uses labels or the query kernels; everything works directly on
the graph (or the timetable) with textbook searches. The searches accept an
optional ``memo`` dict, private to one graph, that caches event lists and
search trees between calls; answers are the same with or without it.
"""
from __future__ import annotations

import heapq
from collections import deque

from .query import EaAnswer, McAnswer, ProfileEntry
from .timetable import ARR, DEP, INFINITY

MAX_PROFILE_WORK = 5_000_000


def _events(g, stop, flag, memo=None):
    key = ("events", stop, flag)
    if memo is not None and key in memo:
        return memo[key]
    out = sorted(
        (int(g.vertex_time[v]), v) for v in range(g.n_events)
        if g.vertex_stop[v] == stop and g.vertex_flags[v] & flag
    )
    if memo is not None:
        memo[key] = out
    return out


def _first_departure(g, stop, tau, memo=None):
    for time, v in _events(g, stop, DEP, memo):
        if time >= tau:
            return v
    return None


def _search(g, u, memo):
    if memo is None:
        return dijkstra(g, u)
    key = ("dist", u)
    if key not in memo:
        memo[key] = dijkstra(g, u)
    return memo[key]


def dijkstra(g, source):
    """Shortest-path costs from ``source`` to every reached vertex."""
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for w, c in g.out_arcs(v):
            nd = d + c
            if nd < dist.get(w, INFINITY):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def reachability_bfs(g, u):
    seen = {u}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        for w, _ in g.out_arcs(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def dijkstra_ea(g, q, memo=None):
    """EA answer by a forward search over the EA graph from the departure event."""
    if q.source == q.target:
        return EaAnswer(q.departure)
    u = _first_departure(g, q.source, q.departure, memo)
    if u is None:
        return EaAnswer(INFINITY)
    dist = _search(g, u, memo)
    t0 = int(g.vertex_time[u])
    best = INFINITY
    for time, v in _events(g, q.target, ARR, memo):
        if v in dist:
            assert t0 + dist[v] == time
            best = min(best, time)
    return EaAnswer(best)


def _pareto(pairs):
    pairs = set(pairs)
    keep = [
        p for p in pairs
        if not any(o != p and o[0] >= p[0] and o[1] <= p[1] for o in pairs)
    ]
    return sorted(keep)


def brute_profile(g, s, t, memo=None):
    """Pareto set of (departure, earliest arrival) over every departure event at ``s``."""
    if s == t:
        return []
    departures = _events(g, s, DEP, memo)
    if len(departures) * max(g.n_arcs, 1) > MAX_PROFILE_WORK:
        raise ValueError("instance too large for brute-force profiles")
    targets = _events(g, t, ARR, memo)
    pairs = []
    for dep, u in departures:
        dist = _search(g, u, memo)
        arrivals = [time for time, v in targets if v in dist]
        if arrivals:
            pairs.append((dep, min(arrivals)))
    return [ProfileEntry(d, a) for d, a in _pareto(pairs)]


def mc_dijkstra(g_mc, q, memo=None):
    """Pareto set of (arrival, transfers) from one Dijkstra run on the MC graph."""
    if q.source == q.target:
        return McAnswer([(q.departure, 0)])
    u = _first_departure(g_mc, q.source, q.departure, memo)
    if u is None:
        return McAnswer([])
    dist = _search(g_mc, u, memo)
    trips = [(time, dist[v]) for time, v in _events(g_mc, q.target, ARR, memo) if v in dist]
    front = []
    for time, c in trips:
        if not front or c < front[-1][1]:
            front.append((time, c))
    entries = []
    for time, c in front:
        transfers = c - 1 if c > 0 else 0
        if entries and entries[-1][1] <= transfers:
            continue
        entries.append((time, transfers))
    return McAnswer(entries)


def scan_reachability(tt, event):
    """Events reachable from ``event`` by relaxing connections and footpaths to a fixpoint.

    A stop reached at time ``x`` makes every event there at ``>= x``
    reachable; a walk ending at ``x`` only counts from the first event at the
    destination at or after ``x``.
    """
    times = [[int(tt.event_time[e]) for e in tt.events_at(p)] for p in range(tt.n_stops)]

    def settle(stop, x):
        return next((y for y in times[stop] if y >= x), None)

    reached = [None] * tt.n_stops
    start = int(tt.event_stop[event])
    reached[start] = int(tt.event_time[event])
    conns = list(zip(tt.conn_dep_stop.tolist(), tt.conn_dep_time.tolist(),
                     tt.conn_arr_stop.tolist(), tt.conn_arr_time.tolist()))
    walks = list(zip(tt.fp_from.tolist(), tt.fp_to.tolist(), tt.fp_dur.tolist()))

    def improve(stop, x):
        if x is not None and (reached[stop] is None or x < reached[stop]):
            reached[stop] = x
            return True
        return False

    # walking from an event starts at that event, so a stop reached at x walks
    # from every later event too; only the earliest matters
    changed = True
    while changed:
        changed = False
        for a, dt, b, at in conns:
            if reached[a] is not None and reached[a] <= dt:
                changed |= improve(b, at)
        for a, b, d in walks:
            if reached[a] is not None:
                changed |= improve(b, settle(b, reached[a] + d))
    out = set()
    for p in range(tt.n_stops):
        if reached[p] is not None:
            out.update(e for e in tt.events_at(p) if tt.event_time[e] >= reached[p])
    return out
