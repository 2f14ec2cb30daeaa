"""Earliest-arrival, profile and multicriteria queries on hub labels.

Two engines answer EA queries: event labels (one intersection test per
candidate arrival event at the target) and stop labels (one coordinated
sweep over two per-stop labels whose hub ids are ordered by time). The
``pruning``/``hashing``/``binary_search`` flags only change how much work
is done, never the answer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numba
import numpy as np

from .labeling import DISTANCE, REACHABILITY
from .timetable import INFINITY

EVENT_LABELS = "event_labels"
STOP_LABELS = "stop_labels"
# the first candidates past tau are scanned before bisecting the rest, so
# answers close to tau cost no more than a scan; the window is fixed by tau
# alone, so pruned probes stay a subset of unpruned ones
BINARY_SCAN_AHEAD = 4

_I64_INF = np.int64(1) << 62


@dataclass(frozen=True)
class EaQuery:
    source: int
    target: int
    departure: int


@dataclass(frozen=True)
class EaVariantFlags:
    pruning: bool = True
    hashing: bool = True
    binary_search: bool = True
    engine: str = EVENT_LABELS

    @classmethod
    def all_variants(cls):
        return [cls(p, h, b, e) for e in (EVENT_LABELS, STOP_LABELS)
                for p in (False, True) for h in (False, True) for b in (False, True)]

    def name(self):
        bits = [n for n, on in (("prn", self.pruning), ("hash", self.hashing),
                                ("bin", self.binary_search)) if on]
        short = "event" if self.engine == EVENT_LABELS else "stop"
        return f"{short}[{'+'.join(bits) or 'plain'}]"


@dataclass
class QueryStats:
    labels_scanned: int = 0
    hubs_scanned: int = 0
    hubs_matched: int = 0


@dataclass
class EaAnswer:
    arrival: int
    matched_hub: int | None = None
    stats: QueryStats = field(default_factory=QueryStats)

    @property
    def reachable(self):
        return self.arrival != INFINITY


class ProfileEntry(NamedTuple):
    departure: int
    arrival: int
    transfers: int | None = None


@dataclass
class McAnswer:
    """Pareto set of ``(arrival, transfers)``; arrivals rise as transfers fall."""

    entries: list


def _check_stop(n_stops, *stops):
    for s in stops:
        if not 0 <= s < n_stops:
            raise KeyError(f"unknown stop {s}")


# --------------------------------------------------------------------------
# kernels: label intersections

@numba.njit(cache=True)
def _merge_match(fh, fa, fb, bh, ba, bb, stats):
    """First common hub of two sorted labels, or -1; counts entries read."""
    i, j = fa, ba
    while i < fb and j < bb:
        x, y = fh[i], bh[j]
        if x < y:
            i += 1
        elif x > y:
            j += 1
        else:
            stats[1] += (i - fa) + (j - ba) + 2
            stats[2] += 1
            return x
    stats[1] += (i - fa) + (j - ba)
    return -1


@numba.njit(cache=True)
def _probe_match(hubset, bh, ba, bb, stats):
    for j in range(ba, bb):
        if bh[j] in hubset:
            stats[1] += j - ba + 1
            stats[2] += 1
            return bh[j]
    stats[1] += bb - ba
    return -1


@numba.njit(cache=True)
def _merge_dist(fh, fd, fa, fb, bh, bd, ba, bb):
    best = _I64_INF
    i, j = fa, ba
    while i < fb and j < bb:
        x, y = fh[i], bh[j]
        if x < y:
            i += 1
        elif x > y:
            j += 1
        else:
            d = fd[i] + bd[j]
            if d < best:
                best = d
            i += 1
            j += 1
    return best


@numba.njit(cache=True)
def _probe(v, hubset, built, fh, fa, fb, bh, bo, hashing, stats):
    """Common hub of the source label and ``v``'s backward label, or -1."""
    if not hashing:
        stats[0] += 2
        return _merge_match(fh, fa, fb, bh, bo[v], bo[v + 1], stats), built
    if not built:
        # the source label is read once and kept as a set
        for k in range(fa, fb):
            hubset.add(fh[k])
        stats[0] += 1
        stats[1] += fb - fa
    stats[0] += 1
    return _probe_match(hubset, bh, bo[v], bo[v + 1], stats), True


@numba.njit(cache=True)
def _ea_event(u, t_lo, t_hi, t_events, t_times, tau, fo, fh, bo, bh,
              pruning, hashing, binary, stats):
    """Index of the earliest arrival event at the target reachable from ``u``."""
    n = t_hi - t_lo
    # events arriving before tau cannot be reached from a departure at >= tau
    first = np.searchsorted(t_times[t_lo:t_hi], tau)
    fa, fb = fo[u], fo[u + 1]
    hubset = {np.int32(0)}
    hubset.clear()
    built = False
    found, hub = n, -1
    # linear part: [start, first + ahead) without binary search, else [start, n)
    start = first if pruning else 0
    stop = min(first + BINARY_SCAN_AHEAD, n) if binary else n
    for idx in range(start, stop):
        m, built = _probe(t_events[t_lo + idx], hubset, built, fh, fa, fb, bh, bo, hashing, stats)
        if m >= 0:
            return idx, m
    # bisection over what is left
    lo, hi = stop, n
    while lo < hi:
        mid = (lo + hi - 1) // 2
        m, built = _probe(t_events[t_lo + mid], hubset, built, fh, fa, fb, bh, bo, hashing, stats)
        if m >= 0:
            hi = mid
            hub = m
        else:
            lo = mid + 1
    return lo, hub


@numba.njit(cache=True)
def _profile_event(s_lo, s_hi, s_events, s_times, t_lo, t_hi, t_events, t_times,
                   fo, fh, bo, bh, out_dep, out_arr):
    stats = np.zeros(3, np.int64)
    i, j, k = s_lo, t_lo, 0
    while i < s_hi and j < t_hi:
        u = s_events[i]
        while j < t_hi and t_times[j] < s_times[i]:
            j += 1
        while j < t_hi:
            v = t_events[j]
            if _merge_match(fh, fo[u], fo[u + 1], bh, bo[v], bo[v + 1], stats) >= 0:
                break
            j += 1
        if j == t_hi:
            break
        v = t_events[j]
        # latest departure still reaching this earliest arrival
        i += 1
        while i < s_hi:
            u = s_events[i]
            if _merge_match(fh, fo[u], fo[u + 1], bh, bo[v], bo[v + 1], stats) < 0:
                break
            i += 1
        out_dep[k] = s_times[i - 1]
        out_arr[k] = t_times[j]
        k += 1
        j += 1
    return k


@numba.njit(cache=True)
def _ea_stop(fh, ft, bh, bt, hub_time, tau, pruning, hashing, binary, stats):
    nf, nb = fh.size, bh.size
    best, best_hub = _I64_INF, -1
    i0, j0 = 0, 0
    h0 = 0
    if pruning:
        h0 = np.searchsorted(hub_time, tau)
    if hashing:
        if pruning:
            if binary:
                i0 = np.searchsorted(fh, h0)
                j0 = np.searchsorted(bh, h0)
            else:
                while i0 < nf and fh[i0] < h0:
                    i0 += 1
                while j0 < nb and bh[j0] < h0:
                    j0 += 1
                stats[1] += i0 + j0
        table = {np.int32(0): np.int64(0)}
        table.clear()
        for i in range(i0, nf):
            table[fh[i]] = ft[i]
        stats[0] += 2
        stats[1] += nf - i0
        for j in range(j0, nb):
            h = bh[j]
            if pruning and hub_time[h] >= best:
                break
            stats[1] += 1
            if h in table:
                stats[2] += 1
                if table[h] >= tau and bt[j] < best:
                    best, best_hub = bt[j], h
        return best, best_hub
    stats[0] += 2
    if pruning and binary:
        i0 = np.searchsorted(fh, h0)
        j0 = np.searchsorted(bh, h0)
    i, j = i0, j0
    while i < nf and j < nb:
        x, y = fh[i], bh[j]
        h = x if x < y else y
        if pruning and h >= h0 and hub_time[h] >= best:
            break
        if x < y:
            i += 1
            stats[1] += 1
        elif x > y:
            j += 1
            stats[1] += 1
        else:
            stats[1] += 2
            stats[2] += 1
            if ft[i] >= tau and bt[j] < best:
                best, best_hub = bt[j], x
            i += 1
            j += 1
    return best, best_hub


@numba.njit(cache=True)
def _pareto_insert(deps, arrs, k, d, a):
    """Insert ``(d, a)`` into a departure-sorted staircase; returns the new size."""
    pos = np.searchsorted(deps[:k], d)
    if pos < k and arrs[pos] <= a:
        return k
    end = pos
    if pos < k and deps[pos] == d:
        end = pos + 1
    q = np.searchsorted(arrs[:pos], a)
    removed = end - q
    shift = 1 - removed
    if shift > 0:
        for x in range(k - 1, end - 1, -1):
            deps[x + shift] = deps[x]
            arrs[x + shift] = arrs[x]
    elif shift < 0:
        for x in range(end, k):
            deps[x + shift] = deps[x]
            arrs[x + shift] = arrs[x]
    deps[q] = d
    arrs[q] = a
    return k + shift


@numba.njit(cache=True)
def _profile_stop(fh, ft, bh, bt, deps, arrs):
    i, j, k = 0, 0, 0
    while i < fh.size and j < bh.size:
        x, y = fh[i], bh[j]
        if x < y:
            i += 1
        elif x > y:
            j += 1
        else:
            k = _pareto_insert(deps, arrs, k, ft[i], bt[j])
            i += 1
            j += 1
    return k


@numba.njit(cache=True)
def _mc(u, t_lo, t_hi, t_events, t_times, tau, fo, fh, fd, bo, bh, bd, pruning,
        out_arr, out_cost):
    first = t_lo
    if pruning:
        first += np.searchsorted(t_times[t_lo:t_hi], tau)
    fa, fb = fo[u], fo[u + 1]
    v_last = t_events[t_hi - 1]
    dmin = _merge_dist(fh, fd, fa, fb, bh, bd, bo[v_last], bo[v_last + 1])
    if dmin >= _I64_INF:
        return 0
    # earliest reachable arrival event by bisection
    lo, hi = first, t_hi - 1
    while lo < hi:
        mid = (lo + hi) // 2
        v = t_events[mid]
        if _merge_dist(fh, fd, fa, fb, bh, bd, bo[v], bo[v + 1]) < _I64_INF:
            hi = mid
        else:
            lo = mid + 1
    k = 0
    last = _I64_INF
    for j in range(lo, t_hi):
        v = t_events[j]
        d = dmin if j == t_hi - 1 else _merge_dist(fh, fd, fa, fb, bh, bd, bo[v], bo[v + 1])
        if d < last:
            out_arr[k] = t_times[j]
            out_cost[k] = d
            k += 1
            last = d
            if d == dmin:
                break
    return k


# --------------------------------------------------------------------------
# public API

def _source_event(tt, s, tau):
    offsets, events, times = tt.departures
    lo, hi = offsets[s], offsets[s + 1]
    i = lo + int(np.searchsorted(times[lo:hi], tau))
    return int(events[i]) if i < hi else None


def _stats(a):
    return QueryStats(int(a[0]), int(a[1]), int(a[2]))


def ea_event_labels(q, ls, tt, flags=None):
    """EA query on reachability event labels."""
    flags = flags or EaVariantFlags()
    _check_stop(tt.n_stops, q.source, q.target)
    if q.source == q.target:
        return EaAnswer(q.departure)
    u = _source_event(tt, q.source, q.departure)
    if u is None:
        return EaAnswer(INFINITY)
    offsets, events, times = tt.arrivals
    lo, hi = offsets[q.target], offsets[q.target + 1]
    stats = np.zeros(3, np.int64)
    found, hub = _ea_event(u, lo, hi, events, times, q.departure,
                           ls.fwd_offsets, ls.fwd_hubs, ls.bwd_offsets, ls.bwd_hubs,
                           flags.pruning, flags.hashing, flags.binary_search, stats)
    if found >= hi - lo:
        return EaAnswer(INFINITY, None, _stats(stats))
    return EaAnswer(int(times[lo + found]), int(hub), _stats(stats))


def ea_stop_labels(q, sls, flags=None):
    """EA query by one coordinated sweep over two stop labels."""
    flags = flags or EaVariantFlags(engine=STOP_LABELS)
    _check_stop(sls.n_stops, q.source, q.target)
    if flags.pruning and not sls.reassigned:
        raise ValueError("pruned stop-label queries need time-ordered hub ids")
    if q.source == q.target:
        return EaAnswer(q.departure)
    fh, ft = sls.forward(q.source)
    bh, bt = sls.backward(q.target)
    stats = np.zeros(3, np.int64)
    best, hub = _ea_stop(fh, ft, bh, bt, sls.hub_time, q.departure,
                         flags.pruning, flags.hashing, flags.binary_search, stats)
    if best >= _I64_INF:
        return EaAnswer(INFINITY, None, _stats(stats))
    return EaAnswer(int(best), int(hub), _stats(stats))


def ea_query(q, flags, *, ls=None, sls=None, tt=None):
    """Dispatch on ``flags.engine``."""
    if flags.engine == EVENT_LABELS:
        return ea_event_labels(q, ls, tt, flags)
    return ea_stop_labels(q, sls, flags)


def profile_event_labels(source, target, ls, tt):
    """All tight ``(departure, arrival)`` pairs via a sweep over the events of both stops."""
    _check_stop(tt.n_stops, source, target)
    if source == target:
        return []
    so, se, st = tt.departures
    to, te, tti = tt.arrivals
    cap = int(min(so[source + 1] - so[source], to[target + 1] - to[target]))
    deps = np.empty(cap, np.int64)
    arrs = np.empty(cap, np.int64)
    k = _profile_event(so[source], so[source + 1], se, st, to[target], to[target + 1], te, tti,
                       ls.fwd_offsets, ls.fwd_hubs, ls.bwd_offsets, ls.bwd_hubs, deps, arrs)
    return [ProfileEntry(int(d), int(a)) for d, a in zip(deps[:k], arrs[:k])]


def profile_stop_labels(source, target, sls):
    """Tight pairs from all hubs shared by the two stop labels, filtered on the fly."""
    _check_stop(sls.n_stops, source, target)
    if source == target:
        return []
    fh, ft = sls.forward(source)
    bh, bt = sls.backward(target)
    cap = min(fh.size, bh.size) + 1
    deps = np.empty(cap, np.int64)
    arrs = np.empty(cap, np.int64)
    k = _profile_stop(fh, ft, bh, bt, deps, arrs)
    return [ProfileEntry(int(d), int(a)) for d, a in zip(deps[:k], arrs[:k])]


def _costs_to_transfers(arrivals, costs):
    """Trips used -> transfers; a walk-only journey after a one-trip one is dominated."""
    out = []
    for a, c in zip(arrivals, costs):
        x = max(int(c) - 1, 0)
        if out and out[-1][1] <= x:
            continue
        out.append((int(a), x))
    return out


def mc_query(q, dls, tt, *, pruning=True):
    """Pareto set over arrival time and number of transfers from distance labels.

    Arrival events at the target are scanned from the earliest reachable one;
    the scan stops once the fewest possible trips (from the last event) is hit.
    """
    if dls.mode != DISTANCE:
        raise ValueError("multicriteria queries need distance labels")
    _check_stop(tt.n_stops, q.source, q.target)
    if q.source == q.target:
        return McAnswer([(q.departure, 0)])
    u = _source_event(tt, q.source, q.departure)
    offsets, events, times = tt.arrivals
    lo, hi = offsets[q.target], offsets[q.target + 1]
    if u is None or lo == hi:
        return McAnswer([])
    out_arr = np.empty(hi - lo, np.int64)
    out_cost = np.empty(hi - lo, np.int64)
    k = _mc(u, lo, hi, events, times, q.departure, dls.fwd_offsets, dls.fwd_hubs, dls.fwd_dists,
            dls.bwd_offsets, dls.bwd_hubs, dls.bwd_dists, pruning, out_arr, out_cost)
    return McAnswer(_costs_to_transfers(out_arr[:k], out_cost[:k]))


def dist_label_query(u, v, dls):
    """Shortest-path cost between two vertices, ``INFINITY`` if no common hub."""
    if dls.mode != DISTANCE:
        raise ValueError("distance queries need distance labels")
    d = _merge_dist(dls.fwd_hubs, dls.fwd_dists, dls.fwd_offsets[u], dls.fwd_offsets[u + 1],
                    dls.bwd_hubs, dls.bwd_dists, dls.bwd_offsets[v], dls.bwd_offsets[v + 1])
    return INFINITY if d >= _I64_INF else int(d)


def reach_label_query(u, v, ls, flags=None):
    """``(reachable, first matching hub)``; stops at the first common hub."""
    flags = flags or EaVariantFlags()
    stats = np.zeros(3, np.int64)
    fa, fb = ls.fwd_offsets[u], ls.fwd_offsets[u + 1]
    ba, bb = ls.bwd_offsets[v], ls.bwd_offsets[v + 1]
    if flags.hashing:
        hubs = set(ls.fwd_hubs[fa:fb].tolist())
        hub = next((h for h in ls.bwd_hubs[ba:bb].tolist() if h in hubs), -1)
    else:
        hub = int(_merge_match(ls.fwd_hubs, fa, fb, ls.bwd_hubs, ba, bb, stats))
    return (hub >= 0), (hub if hub >= 0 else None)
