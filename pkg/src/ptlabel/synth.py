"""Deterministic synthetic timetables.

Trips are grouped into routes (fixed stop sequences and hop times) and each
trip starts at a random time of day, so stops see repeated service the way
real feeds do.
"""
from __future__ import annotations

import math

import numpy as np

from .timetable import Timetable

SHAPES = ("line", "grid", "hub-and-spoke")
DAY = 86400


def _line_route(rng, n, max_len):
    length = int(rng.integers(2, min(n, max_len) + 1))
    start = int(rng.integers(0, n - length + 1))
    path = list(range(start, start + length))
    return path[::-1] if rng.random() < 0.5 else path


def _grid_route(rng, n, max_len):
    w = math.ceil(math.sqrt(n))
    for _ in range(100):
        a, b = rng.choice(n, size=2, replace=False)
        (ra, ca), (rb, cb) = divmod(int(a), w), divmod(int(b), w)
        path, r, c = [int(a)], ra, ca
        while (r, c) != (rb, cb) and len(path) < max_len:
            # monotone staircase toward b
            if r != rb and (c == cb or rng.random() < 0.5):
                r += 1 if rb > r else -1
            else:
                c += 1 if cb > c else -1
            v = r * w + c
            if v >= n:
                break
            path.append(v)
        if len(path) >= 2:
            return path
    return [0, 1]


def _hub_route(rng, n, max_len):
    spokes = max(1, min(8, (n - 1) // 3))
    arms = [list(range(1 + k, n, spokes)) for k in range(spokes)]
    arms = [a for a in arms if a]
    i, j = rng.choice(len(arms), size=2, replace=len(arms) < 2)
    inbound = arms[int(i)][: int(rng.integers(1, len(arms[int(i)]) + 1))][::-1]
    outbound = arms[int(j)][: int(rng.integers(0, len(arms[int(j)]) + 1))]
    if int(i) == int(j):
        outbound = []
    path = (inbound + [0] + outbound)[:max_len]
    return path if len(path) >= 2 else [path[0], 0] if path[0] != 0 else [0, 1]


_ROUTES = {"line": _line_route, "grid": _grid_route, "hub-and-spoke": _hub_route}


def _neighbours(shape, n):
    if shape == "grid":
        w = math.ceil(math.sqrt(n))
        pairs = [(v, v + 1) for v in range(n - 1) if (v + 1) % w]
        pairs += [(v, v + w) for v in range(n - w)]
        return pairs
    if shape == "hub-and-spoke":
        return [(a, b) for a in range(1, n) for b in range(a + 1, min(n, a + 3))]
    return [(v, v + 1) for v in range(n - 1)]


def generate_timetable(n_stops, n_trips, seed=0, shape="grid", *, n_footpaths=None,
                       max_route_len=12, trips_per_route=4, mtt_max=0, day=DAY):
    """Random timetable with ``n_stops`` stops and ``n_trips`` trips.

    Same arguments give an identical timetable. ``n_footpaths`` defaults to
    ``min(10, n_stops // 4)`` undirected footpaths between neighbouring stops.
    """
    if n_stops < 2 or n_trips < 1:
        raise ValueError("need at least 2 stops and 1 trip")
    if shape not in SHAPES:
        raise ValueError(f"shape must be one of {SHAPES}")
    rng = np.random.default_rng(seed)
    make_route = _ROUTES[shape]
    n_routes = max(1, math.ceil(n_trips / trips_per_route))
    routes = []
    for _ in range(n_routes):
        path = make_route(rng, n_stops, max_route_len)
        hops = rng.integers(60, 601, size=len(path) - 1)
        dwell = rng.choice([0, 30], size=len(path) - 1)
        routes.append((path, hops.tolist(), dwell.tolist()))

    trips = []
    for k in range(n_trips):
        path, hops, dwell = routes[k % n_routes] if k < n_routes else routes[int(rng.integers(n_routes))]
        t = int(rng.integers(0, day))
        conns = []
        for i in range(len(path) - 1):
            if i:
                t += dwell[i]
            dep = t
            t += hops[i]
            conns.append((path[i], dep, path[i + 1], t))
        trips.append((f"T{k}", conns))

    if n_footpaths is None:
        n_footpaths = min(10, n_stops // 4)
    cand = _neighbours(shape, n_stops)
    fps = []
    if cand and n_footpaths:
        pick = rng.choice(len(cand), size=min(n_footpaths, len(cand)), replace=False)
        for i in sorted(pick.tolist()):
            a, b = cand[i]
            fps.append((a, b, int(rng.integers(60, 301))))

    mtt = rng.integers(0, mtt_max + 1, size=n_stops) if mtt_max else np.zeros(n_stops, np.int64)
    stops = [(f"S{i}", int(m)) for i, m in enumerate(mtt)]
    return Timetable.build(stops, trips, fps)
