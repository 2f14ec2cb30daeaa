"""Location-to-location queries over several access and egress stops.

A superlabel is the hub-sorted union of the member stop labels with walk
times folded in: forward times become departures from the origin
(``time - walk``), backward times become arrivals at the destination
(``time + walk``). It is never built; the query kernels advance one cursor
per member and always emit the smallest hub next.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .query import EaAnswer, ProfileEntry, QueryStats, _pareto_insert
from .timetable import INFINITY

_I64_INF = np.int64(1) << 62
_NO_HUB = np.int64(1) << 40


@dataclass(frozen=True)
class LocationAccess:
    """Stops near a location with their walking times in seconds."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((int(p), int(w)) for p, w in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("empty access set")
        if any(w < 0 for _, w in entries):
            raise ValueError("walk times must be non-negative")
        if len({p for p, _ in entries}) != len(entries):
            raise ValueError("access stops must be distinct")

    @property
    def stops(self):
        return [p for p, _ in self.entries]

    @classmethod
    def parse(cls, text, tt):
        """``"A:60,B:0"`` with stop names resolved through ``tt``; a bare name walks 0."""
        entries = []
        for part in filter(None, (s.strip() for s in text.split(","))):
            name, _, walk = part.rpartition(":") if ":" in part else (part, "", "0")
            entries.append((tt.stop_index(name), int(walk)))
        return cls(tuple(entries))


@numba.njit(cache=True)
def _next(hubs, times, pos, ends, walks, forward):
    """Pop the smallest hub across all member cursors with its merged time."""
    h = _NO_HUB
    for m in range(pos.size):
        if pos[m] < ends[m] and hubs[pos[m]] < h:
            h = hubs[pos[m]]
    if h == _NO_HUB:
        return -1, np.int64(0)
    best = -_I64_INF if forward else _I64_INF
    for m in range(pos.size):
        if pos[m] < ends[m] and hubs[pos[m]] == h:
            if forward:
                t = times[pos[m]] - walks[m]
                if t > best:
                    best = t
            else:
                t = times[pos[m]] + walks[m]
                if t < best:
                    best = t
            pos[m] += 1
    return h, best


@numba.njit(cache=True)
def _drain(hubs, times, pos, ends, walks, forward, out_h, out_t):
    k = 0
    while True:
        h, t = _next(hubs, times, pos, ends, walks, forward)
        if h < 0:
            return k
        out_h[k] = h
        out_t[k] = t
        k += 1


@numba.njit(cache=True)
def _loc_ea(fh, ft, fpos, fend, fwalk, bh, bt, bpos, bend, bwalk,
            hub_time, tau, pruning, stats):
    if pruning:
        # hubs before tau cannot lie on a journey leaving the origin at >= tau
        h0 = np.searchsorted(hub_time, tau)
        for m in range(fpos.size):
            fpos[m] += np.searchsorted(fh[fpos[m]:fend[m]], h0)
        for m in range(bpos.size):
            bpos[m] += np.searchsorted(bh[bpos[m]:bend[m]], h0)
    stats[0] += fpos.size + bpos.size
    best, best_hub = _I64_INF, -1
    x, xt = _next(fh, ft, fpos, fend, fwalk, True)
    y, yt = _next(bh, bt, bpos, bend, bwalk, False)
    while x >= 0 and y >= 0:
        h = x if x < y else y
        if pruning and hub_time[h] >= best:
            break
        if x < y:
            stats[1] += 1
            x, xt = _next(fh, ft, fpos, fend, fwalk, True)
        elif x > y:
            stats[1] += 1
            y, yt = _next(bh, bt, bpos, bend, bwalk, False)
        else:
            stats[1] += 2
            stats[2] += 1
            if xt >= tau and yt < best:
                best, best_hub = yt, x
            x, xt = _next(fh, ft, fpos, fend, fwalk, True)
            y, yt = _next(bh, bt, bpos, bend, bwalk, False)
    return best, best_hub


@numba.njit(cache=True)
def _loc_profile(fh, ft, fpos, fend, fwalk, bh, bt, bpos, bend, bwalk, deps, arrs):
    k = 0
    x, xt = _next(fh, ft, fpos, fend, fwalk, True)
    y, yt = _next(bh, bt, bpos, bend, bwalk, False)
    while x >= 0 and y >= 0:
        if x < y:
            x, xt = _next(fh, ft, fpos, fend, fwalk, True)
        elif x > y:
            y, yt = _next(bh, bt, bpos, bend, bwalk, False)
        else:
            k = _pareto_insert(deps, arrs, k, xt, yt)
            x, xt = _next(fh, ft, fpos, fend, fwalk, True)
            y, yt = _next(bh, bt, bpos, bend, bwalk, False)
    return k


def _cursors(sls, access, forward):
    offsets = sls.fwd_offsets if forward else sls.bwd_offsets
    stops = np.array(access.stops, dtype=np.int64)
    pos = offsets[stops].astype(np.int64)
    ends = offsets[stops + 1].astype(np.int64)
    walks = np.array([w for _, w in access.entries], dtype=np.int64)
    return pos, ends, walks


def _check(src, dst, sls):
    for acc in (src, dst):
        for p in acc.stops:
            if not 0 <= p < sls.n_stops:
                raise KeyError(f"unknown stop {p}")
    if set(src.stops) & set(dst.stops):
        raise ValueError("origin and destination access sets overlap")


def superlabel_entries(sls, access, forward=True):
    """The merged superlabel as ``(hubs, times)``, produced by the lazy merge."""
    pos, ends, walks = _cursors(sls, access, forward)
    hubs, times = (sls.fwd_hubs, sls.fwd_times) if forward else (sls.bwd_hubs, sls.bwd_times)
    cap = int((ends - pos).sum())
    out_h = np.empty(cap, np.int64)
    out_t = np.empty(cap, np.int64)
    k = _drain(hubs, times, pos, ends, walks, forward, out_h, out_t)
    return out_h[:k], out_t[:k]


def loc_ea_query(src, dst, tau, sls, *, pruning=True):
    """Earliest arrival at the destination leaving the origin no earlier than ``tau``.

    Times include the walks: departure is from the origin location and
    arrival is at the destination location.
    """
    _check(src, dst, sls)
    if pruning and not sls.reassigned:
        raise ValueError("pruned stop-label queries need time-ordered hub ids")
    fpos, fend, fwalk = _cursors(sls, src, True)
    bpos, bend, bwalk = _cursors(sls, dst, False)
    stats = np.zeros(3, np.int64)
    best, hub = _loc_ea(sls.fwd_hubs, sls.fwd_times, fpos, fend, fwalk,
                        sls.bwd_hubs, sls.bwd_times, bpos, bend, bwalk,
                        sls.hub_time, int(tau), pruning, stats)
    st = QueryStats(*(int(x) for x in stats))
    if best >= _I64_INF:
        return EaAnswer(INFINITY, None, st)
    return EaAnswer(int(best), int(hub), st)


def loc_profile_query(src, dst, sls):
    """Tight ``(departure from origin, arrival at destination)`` pairs."""
    _check(src, dst, sls)
    fpos, fend, fwalk = _cursors(sls, src, True)
    bpos, bend, bwalk = _cursors(sls, dst, False)
    cap = int(min((fend - fpos).sum(), (bend - bpos).sum())) + 1
    deps = np.empty(cap, np.int64)
    arrs = np.empty(cap, np.int64)
    k = _loc_profile(sls.fwd_hubs, sls.fwd_times, fpos, fend, fwalk,
                     sls.bwd_hubs, sls.bwd_times, bpos, bend, bwalk, deps, arrs)
    return [ProfileEntry(int(d), int(a)) for d, a in zip(deps[:k], arrs[:k])]
