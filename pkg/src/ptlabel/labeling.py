"""Hub labels on time-expanded graphs.

Labels are built by pruned labeling: vertices are processed in a priority
order and each one is pushed as a hub into the labels of the vertices it
reaches (forward search) or is reached from (backward search), skipping any
vertex whose pair with the hub is already covered. Hub ids are ranks in that
order until :func:`reassign_hub_ids` renumbers them by time.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, replace

import numba
import numpy as np
from numba.typed import List

from .graph import EA, arrival_capable, departure_capable
from .timetable import INFINITY

REACHABILITY = "reachability"
DISTANCE = "distance"

_I64_INF = np.int64(1) << 62


@dataclass(frozen=True, eq=False)
class LabelSet:
    """Forward/backward labels per vertex in CSR layout.

    ``fwd_hubs[fwd_offsets[v]:fwd_offsets[v+1]]`` is the forward label of
    ``v`` sorted by hub id; ``fwd_dists`` is parallel to it in distance mode.
    ``hub_vertex``/``hub_time``/``hub_stop`` describe every hub id.
    """

    mode: str
    fwd_offsets: np.ndarray
    fwd_hubs: np.ndarray
    bwd_offsets: np.ndarray
    bwd_hubs: np.ndarray
    hub_vertex: np.ndarray
    hub_time: np.ndarray
    hub_stop: np.ndarray
    fwd_dists: np.ndarray | None = None
    bwd_dists: np.ndarray | None = None
    trimmed: bool = False
    reassigned: bool = False

    @property
    def n_vertices(self):
        return int(self.fwd_offsets.size - 1)

    @property
    def n_hubs(self):
        return int(self.hub_vertex.size)

    def forward(self, v):
        return self.fwd_hubs[self.fwd_offsets[v]:self.fwd_offsets[v + 1]]

    def backward(self, v):
        return self.bwd_hubs[self.bwd_offsets[v]:self.bwd_offsets[v + 1]]

    def forward_dists(self, v):
        return self.fwd_dists[self.fwd_offsets[v]:self.fwd_offsets[v + 1]]

    def backward_dists(self, v):
        return self.bwd_dists[self.bwd_offsets[v]:self.bwd_offsets[v + 1]]

    def stats(self):
        nf = np.diff(self.fwd_offsets)
        nb = np.diff(self.bwd_offsets)
        labels = int((nf > 0).sum() + (nb > 0).sum())
        return {
            "labels": labels,
            "forward_hubs": int(self.fwd_hubs.size),
            "backward_hubs": int(self.bwd_hubs.size),
            "hubs_per_label": (self.fwd_hubs.size + self.bwd_hubs.size) / labels if labels else 0.0,
            "max_label": int(max(nf.max(initial=0), nb.max(initial=0))),
        }


@dataclass(frozen=True, eq=False)
class StopLabelSet:
    """Per-stop labels of ``(hub, time)`` pairs, hubs and times in separate arrays.

    Forward times are the latest departure from the stop reaching the hub;
    backward times the earliest arrival at the stop from the hub.
    """

    fwd_offsets: np.ndarray
    fwd_hubs: np.ndarray
    fwd_times: np.ndarray
    bwd_offsets: np.ndarray
    bwd_hubs: np.ndarray
    bwd_times: np.ndarray
    hub_vertex: np.ndarray
    hub_time: np.ndarray
    hub_stop: np.ndarray
    reassigned: bool = False

    @property
    def n_stops(self):
        return int(self.fwd_offsets.size - 1)

    @property
    def n_hubs(self):
        return int(self.hub_vertex.size)

    def forward(self, p):
        a, b = self.fwd_offsets[p], self.fwd_offsets[p + 1]
        return self.fwd_hubs[a:b], self.fwd_times[a:b]

    def backward(self, p):
        a, b = self.bwd_offsets[p], self.bwd_offsets[p + 1]
        return self.bwd_hubs[a:b], self.bwd_times[a:b]

    def stats(self):
        n = self.n_stops
        total = self.fwd_hubs.size + self.bwd_hubs.size
        return {
            "forward_hubs": int(self.fwd_hubs.size),
            "backward_hubs": int(self.bwd_hubs.size),
            "hubs_per_stop": total / (2 * n) if n else 0.0,
        }


# --------------------------------------------------------------------------
# pruned labeling kernels

@numba.njit(cache=True)
def _push(labels, counts, v, value):
    arr = labels[v]
    c = counts[v]
    if c == arr.size:
        grown = np.empty(max(4, 2 * arr.size), arr.dtype)
        grown[:c] = arr[:c]
        labels[v] = grown
        arr = grown
    arr[c] = value
    counts[v] = c + 1


@numba.njit(cache=True)
def _push_pair(hubs, dists, counts, v, hub, d):
    arr, arr_d = hubs[v], dists[v]
    c = counts[v]
    if c == arr.size:
        size = max(4, 2 * arr.size)
        grown = np.empty(size, arr.dtype)
        grown[:c] = arr[:c]
        grown_d = np.empty(size, arr_d.dtype)
        grown_d[:c] = arr_d[:c]
        hubs[v] = grown
        dists[v] = grown_d
        arr, arr_d = grown, grown_d
    arr[c] = hub
    arr_d[c] = d
    counts[v] = c + 1


@numba.njit(cache=True)
def _flatten(labels, counts, probe):
    n = counts.size
    offsets = np.zeros(n + 1, np.int64)
    for v in range(n):
        offsets[v + 1] = offsets[v] + counts[v]
    flat = np.empty(offsets[n], probe.dtype)
    for v in range(n):
        flat[offsets[v]:offsets[v + 1]] = labels[v][:counts[v]]
    return offsets, flat


@numba.njit(cache=True)
def _new_labels(n, dtype_probe):
    out = List()
    for _ in range(n):
        out.append(np.empty(0, dtype_probe.dtype))
    return out


@numba.njit(cache=True)
def _pruned_reach_search(h, r, indptr, indices, own, own_cnt, other, other_cnt,
                         mark, seen, stamp, queue):
    # hubs of h's own label on the opposite side mark the pairs already covered
    lab = own[h]
    for i in range(own_cnt[h]):
        mark[lab[i]] = 1
    queue[0] = h
    seen[h] = stamp
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        covered = False
        lv = other[v]
        for i in range(other_cnt[v]):
            if mark[lv[i]]:
                covered = True
                break
        if covered:
            continue
        _push(other, other_cnt, v, r)
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if seen[w] != stamp:
                seen[w] = stamp
                queue[tail] = w
                tail += 1
    for i in range(own_cnt[h]):
        mark[lab[i]] = 0


@numba.njit(cache=True)
def _pruned_reach(n, indptr, indices, rindptr, rindices, order):
    probe = np.empty(0, np.int32)
    fwd = _new_labels(n, probe)
    bwd = _new_labels(n, probe)
    fc = np.zeros(n, np.int64)
    bc = np.zeros(n, np.int64)
    mark = np.zeros(n, np.int8)
    seen = np.zeros(n, np.int64)
    queue = np.empty(max(n, 1), np.int64)
    for r in range(n):
        h = order[r]
        _pruned_reach_search(h, r, indptr, indices, fwd, fc, bwd, bc, mark, seen, 2 * r + 1, queue)
        _pruned_reach_search(h, r, rindptr, rindices, bwd, bc, fwd, fc, mark, seen, 2 * r + 2, queue)
    fo, fh = _flatten(fwd, fc, probe)
    bo, bh = _flatten(bwd, bc, probe)
    return fo, fh, bo, bh


@numba.njit(cache=True)
def _pruned_dist_search(h, r, indptr, indices, costs, own, own_d, own_cnt,
                        other, other_d, other_cnt, tmp, dist, done, stamp, dq, touched):
    lab, labd = own[h], own_d[h]
    for i in range(own_cnt[h]):
        tmp[lab[i]] = labd[i]
    # 0-1 BFS on a circular deque
    cap = dq.size
    front, size = 0, 1
    dq[0] = h
    dist[h] = 0
    touched[0] = h
    n_touched = 1
    while size > 0:
        v = dq[front]
        front = (front + 1) % cap
        size -= 1
        if done[v] == stamp:
            continue
        done[v] = stamp
        d = dist[v]
        best = _I64_INF
        lv, ld = other[v], other_d[v]
        for i in range(other_cnt[v]):
            x = tmp[lv[i]] + ld[i]
            if x < best:
                best = x
        if best <= d:
            continue
        _push_pair(other, other_d, other_cnt, v, r, d)
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            nd = d + costs[k]
            if done[w] != stamp and nd < dist[w]:
                if dist[w] == _I64_INF:
                    touched[n_touched] = w
                    n_touched += 1
                dist[w] = nd
                if costs[k] == 0:
                    front = (front - 1) % cap
                    dq[front] = w
                else:
                    dq[(front + size) % cap] = w
                size += 1
    for i in range(n_touched):
        dist[touched[i]] = _I64_INF
    for i in range(own_cnt[h]):
        tmp[lab[i]] = _I64_INF


@numba.njit(cache=True)
def _pruned_dist(n, indptr, indices, costs, rindptr, rindices, rcosts, order):
    probe = np.empty(0, np.int32)
    probe_d = np.empty(0, np.int64)
    fwd, fwd_d = _new_labels(n, probe), _new_labels(n, probe_d)
    bwd, bwd_d = _new_labels(n, probe), _new_labels(n, probe_d)
    fc = np.zeros(n, np.int64)
    bc = np.zeros(n, np.int64)
    tmp = np.full(n, _I64_INF, np.int64)
    dist = np.full(n, _I64_INF, np.int64)
    done = np.zeros(n, np.int64)
    dq = np.empty(indices.size + n + 2, np.int64)
    touched = np.empty(max(n, 1), np.int64)
    for r in range(n):
        h = order[r]
        _pruned_dist_search(h, r, indptr, indices, costs, fwd, fwd_d, fc,
                            bwd, bwd_d, bc, tmp, dist, done, 2 * r + 1, dq, touched)
        _pruned_dist_search(h, r, rindptr, rindices, rcosts, bwd, bwd_d, bc,
                            fwd, fwd_d, fc, tmp, dist, done, 2 * r + 2, dq, touched)
    fo, fh = _flatten(fwd, fc, probe)
    _, fd = _flatten(fwd_d, fc, probe_d)
    bo, bh = _flatten(bwd, bc, probe)
    _, bd = _flatten(bwd_d, bc, probe_d)
    return fo, fh, fd, bo, bh, bd


@numba.njit(cache=True)
def _sample_scores(n, indptr, indices, roots, score):
    # BFS tree from each root; every vertex scores the size of its subtree
    parent = np.empty(n, np.int64)
    seen = np.zeros(n, np.int64)
    queue = np.empty(max(n, 1), np.int64)
    sub = np.zeros(n, np.int64)
    for j in range(roots.size):
        root = roots[j]
        stamp = j + 1
        queue[0] = root
        seen[root] = stamp
        parent[root] = -1
        head, tail = 0, 1
        while head < tail:
            v = queue[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if seen[w] != stamp:
                    seen[w] = stamp
                    parent[w] = v
                    queue[tail] = w
                    tail += 1
        for i in range(tail):
            sub[queue[i]] = 1
        for i in range(tail - 1, 0, -1):
            v = queue[i]
            sub[parent[v]] += sub[v]
        for i in range(tail):
            score[queue[i]] += sub[queue[i]]


@numba.njit(cache=True)
def _sample_scores_01(n, indptr, indices, costs, roots, score):
    # same as _sample_scores but over 0-1 shortest-path trees
    parent = np.empty(n, np.int64)
    dist = np.full(n, _I64_INF, np.int64)
    done = np.zeros(n, np.int64)
    dq = np.empty(indices.size + n + 2, np.int64)
    settled = np.empty(max(n, 1), np.int64)
    sub = np.zeros(n, np.int64)
    cap = dq.size
    for j in range(roots.size):
        stamp = j + 1
        root = roots[j]
        front, size = 0, 1
        dq[0] = root
        dist[root] = 0
        parent[root] = -1
        n_settled = 0
        while size > 0:
            v = dq[front]
            front = (front + 1) % cap
            size -= 1
            if done[v] == stamp:
                continue
            done[v] = stamp
            settled[n_settled] = v
            n_settled += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                nd = dist[v] + costs[k]
                if done[w] != stamp and nd < dist[w]:
                    dist[w] = nd
                    parent[w] = v
                    if costs[k] == 0:
                        front = (front - 1) % cap
                        dq[front] = w
                    else:
                        dq[(front + size) % cap] = w
                    size += 1
        # settle order is a topological order of the tree
        for i in range(n_settled):
            sub[settled[i]] = 1
        for i in range(n_settled - 1, 0, -1):
            v = settled[i]
            sub[parent[v]] += sub[v]
        for i in range(n_settled):
            score[settled[i]] += sub[settled[i]]
            dist[settled[i]] = _I64_INF


# --------------------------------------------------------------------------
# orderings

def degree_ordering(g):
    """Descending total degree, ties by closeness of the event time to the median time."""
    if g.n_vertices == 0:
        return np.zeros(0, np.int64)
    deg = np.diff(g.indptr) + np.diff(g.rindptr)
    spread = np.abs(g.vertex_time - np.median(g.vertex_time))
    return np.lexsort((np.arange(g.n_vertices), spread, -deg)).astype(np.int64)


def sampled_ordering(g, k=256, seed=0):
    """Order by estimated path coverage from ``k`` sampled forward and backward trees.

    The trees are BFS trees on EA graphs and 0-1 shortest-path trees on MC
    graphs, matching what the labels have to cover.
    """
    n = g.n_vertices
    if n == 0:
        return np.zeros(0, np.int64)
    rng = np.random.default_rng(seed)
    roots = rng.choice(n, size=min(k, n), replace=False).astype(np.int64)
    score = np.zeros(n, np.int64)
    if g.mode == EA:
        _sample_scores(n, g.indptr, g.indices, roots, score)
        _sample_scores(n, g.rindptr, g.rindices, roots, score)
    else:
        _sample_scores_01(n, g.indptr, g.indices, g.costs, roots, score)
        _sample_scores_01(n, g.rindptr, g.rindices, g.rcosts, roots, score)
    deg = np.diff(g.indptr) + np.diff(g.rindptr)
    spread = np.abs(g.vertex_time - np.median(g.vertex_time))
    return np.lexsort((np.arange(n), spread, -deg, -score)).astype(np.int64)


def make_ordering(g, ordering="degree", seed=0):
    if isinstance(ordering, str):
        if ordering == "degree":
            return degree_ordering(g)
        if ordering == "sampled":
            return sampled_ordering(g, seed=seed)
        raise ValueError(f"unknown ordering {ordering!r}")
    order = np.asarray(ordering, dtype=np.int64)
    if order.size != g.n_vertices or not np.array_equal(np.sort(order), np.arange(g.n_vertices)):
        raise ValueError("ordering must be a permutation of the vertices")
    return order


# --------------------------------------------------------------------------
# construction

def _restrict(offsets, *arrays, keep):
    """Drop whole labels of vertices where ``keep`` is false."""
    sizes = np.diff(offsets)
    entry_keep = np.repeat(keep, sizes)
    new_offsets = np.zeros_like(offsets)
    np.cumsum(np.where(keep, sizes, 0), out=new_offsets[1:])
    return (new_offsets,) + tuple(a[entry_keep] for a in arrays)


def build_labels(g, mode=None, ordering="sampled", *, seed=0, keep_all=False):
    """Build a 2-hop labeling of ``g``.

    ``mode`` defaults to reachability for EA graphs and distance for MC
    graphs. Unless ``keep_all`` is set, forward labels are kept only on
    departure-capable events and backward labels only on arrival-capable
    events, which is all the transit queries need.
    """
    if mode is None:
        mode = REACHABILITY if g.mode == EA else DISTANCE
    order = make_ordering(g, ordering, seed)
    n = g.n_vertices
    if mode == REACHABILITY:
        fo, fh, bo, bh = _pruned_reach(n, g.indptr, g.indices, g.rindptr, g.rindices, order)
        fd = bd = None
    elif mode == DISTANCE:
        fo, fh, fd, bo, bh, bd = _pruned_dist(n, g.indptr, g.indices, g.costs,
                                              g.rindptr, g.rindices, g.rcosts, order)
    else:
        raise ValueError(f"unknown label mode {mode!r}")
    if not keep_all:
        fwd = (fh,) if fd is None else (fh, fd)
        bwd = (bh,) if bd is None else (bh, bd)
        fo, *fwd = _restrict(fo, *fwd, keep=departure_capable(g))
        bo, *bwd = _restrict(bo, *bwd, keep=arrival_capable(g))
        fh, fd = fwd[0], (fwd[1] if len(fwd) > 1 else None)
        bh, bd = bwd[0], (bwd[1] if len(bwd) > 1 else None)
    return LabelSet(
        mode=mode,
        fwd_offsets=fo, fwd_hubs=fh.astype(np.int32),
        bwd_offsets=bo, bwd_hubs=bh.astype(np.int32),
        hub_vertex=order,
        hub_time=g.vertex_time[order].astype(np.int64),
        hub_stop=g.vertex_stop[order].astype(np.int64),
        fwd_dists=fd, bwd_dists=bd,
    )


def _entries(offsets, hubs):
    owner = np.repeat(np.arange(offsets.size - 1), np.diff(offsets))
    return owner, hubs


def _csr_from_entries(n, owner, *cols):
    """Group entries by owner and sort each group by its first column."""
    order = np.lexsort((cols[0], owner))
    offsets = np.zeros(n + 1, np.int64)
    np.cumsum(np.bincount(owner, minlength=n), out=offsets[1:])
    return (offsets,) + tuple(c[order] for c in cols)


def _first_per_stop_hub(stop, hub, key):
    """Index of the entry with the smallest ``key`` per (stop, hub)."""
    order = np.lexsort((key, hub, stop))
    s, h = stop[order], hub[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = (s[1:] != s[:-1]) | (h[1:] != h[:-1])
    return order[first]


def trim_event_labels(ls, tt):
    """Keep each hub only at the latest departure (forward) / earliest arrival
    (backward) event of a stop whose label contains it."""
    if ls.mode != REACHABILITY:
        raise ValueError("trimming applies to reachability labels")
    n = ls.n_vertices
    ev_stop = tt.event_stop
    fo_owner, fh = _entries(ls.fwd_offsets, ls.fwd_hubs)
    keep_f = _first_per_stop_hub(ev_stop[fo_owner], fh, -fo_owner)
    bo_owner, bh = _entries(ls.bwd_offsets, ls.bwd_hubs)
    keep_b = _first_per_stop_hub(ev_stop[bo_owner], bh, bo_owner)
    fo, fh2 = _csr_from_entries(n, fo_owner[keep_f], fh[keep_f])
    bo, bh2 = _csr_from_entries(n, bo_owner[keep_b], bh[keep_b])
    return replace(ls, fwd_offsets=fo, fwd_hubs=fh2, bwd_offsets=bo, bwd_hubs=bh2, trimmed=True)


def build_stop_labels(ls, tt):
    """Merge event labels into per-stop labels of ``(hub, time)`` pairs."""
    if ls.mode != REACHABILITY:
        raise ValueError("stop labels are built from reachability labels")
    n_stops = tt.n_stops
    ev_stop, ev_time = tt.event_stop, tt.event_time
    fo_owner, fh = _entries(ls.fwd_offsets, ls.fwd_hubs)
    keep = _first_per_stop_hub(ev_stop[fo_owner], fh, -ev_time[fo_owner])
    f_off, f_hubs, f_times = _csr_from_entries(n_stops, ev_stop[fo_owner[keep]], fh[keep],
                                               ev_time[fo_owner[keep]])
    bo_owner, bh = _entries(ls.bwd_offsets, ls.bwd_hubs)
    keep = _first_per_stop_hub(ev_stop[bo_owner], bh, ev_time[bo_owner])
    b_off, b_hubs, b_times = _csr_from_entries(n_stops, ev_stop[bo_owner[keep]], bh[keep],
                                               ev_time[bo_owner[keep]])
    return StopLabelSet(
        fwd_offsets=f_off, fwd_hubs=f_hubs.astype(np.int32), fwd_times=f_times.astype(np.int64),
        bwd_offsets=b_off, bwd_hubs=b_hubs.astype(np.int32), bwd_times=b_times.astype(np.int64),
        hub_vertex=ls.hub_vertex, hub_time=ls.hub_time, hub_stop=ls.hub_stop,
        reassigned=ls.reassigned,
    )


def _remap(offsets, hubs, id_map, *cols):
    n = offsets.size - 1
    owner = np.repeat(np.arange(n), np.diff(offsets))
    new = id_map[hubs].astype(np.int32)
    _, *out = _csr_from_entries(n, owner, new, *cols)
    return out


def reassign_hub_ids(sls, ls):
    """Renumber hubs by increasing event time, ties by (stop, old id).

    Returns the renumbered stop labels, event labels and the old->new id map.
    """
    old = np.arange(ls.n_hubs)
    new_order = np.lexsort((old, ls.hub_stop, ls.hub_time))
    id_map = np.empty(ls.n_hubs, np.int64)
    id_map[new_order] = np.arange(ls.n_hubs)
    hub_fields = dict(hub_vertex=ls.hub_vertex[new_order], hub_time=ls.hub_time[new_order],
                      hub_stop=ls.hub_stop[new_order], reassigned=True)

    fcols = [ls.fwd_dists] if ls.fwd_dists is not None else []
    bcols = [ls.bwd_dists] if ls.bwd_dists is not None else []
    fh, *fd = _remap(ls.fwd_offsets, ls.fwd_hubs, id_map, *fcols)
    bh, *bd = _remap(ls.bwd_offsets, ls.bwd_hubs, id_map, *bcols)
    ls2 = replace(ls, fwd_hubs=fh, bwd_hubs=bh,
                  fwd_dists=fd[0] if fd else None, bwd_dists=bd[0] if bd else None,
                  **hub_fields)
    sls2 = None
    if sls is not None:
        sfh, sft = _remap(sls.fwd_offsets, sls.fwd_hubs, id_map, sls.fwd_times)
        sbh, sbt = _remap(sls.bwd_offsets, sls.bwd_hubs, id_map, sls.bwd_times)
        sls2 = replace(sls, fwd_hubs=sfh, fwd_times=sft, bwd_hubs=sbh, bwd_times=sbt, **hub_fields)
    return sls2, ls2, id_map


# --------------------------------------------------------------------------
# binary store

MAGIC = b"PTLB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHBBBBQQQQ")
_KIND_EVENT, _KIND_STOP = 0, 1


class LabelStoreError(ValueError):
    pass


def _u32(a):
    a = np.asarray(a)
    if a.size and (a.min() < 0 or a.max() > INFINITY):
        raise LabelStoreError("value does not fit in 32 bits")
    return a.astype("<u4").tobytes()


def _u64(a):
    return np.asarray(a).astype("<u8").tobytes()


def serialize_labels(labels):
    """Encode a :class:`LabelSet` or :class:`StopLabelSet` as versioned bytes."""
    if isinstance(labels, StopLabelSet):
        kind, mode = _KIND_STOP, 0
        flags = 2 * labels.reassigned
        fvals, bvals = labels.fwd_times, labels.bwd_times
    elif isinstance(labels, LabelSet):
        kind, mode = _KIND_EVENT, int(labels.mode == DISTANCE)
        flags = labels.trimmed | 2 * labels.reassigned
        fvals, bvals = labels.fwd_dists, labels.bwd_dists
    else:
        raise TypeError(f"cannot serialize {type(labels).__name__}")
    n = labels.fwd_offsets.size - 1
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, kind, mode, flags, 0,
                        n, labels.hub_vertex.size, labels.fwd_hubs.size, labels.bwd_hubs.size)
    parts = [head, _u32(labels.hub_vertex), _u32(labels.hub_time), _u32(labels.hub_stop),
             _u64(labels.fwd_offsets[1:]), _u32(labels.fwd_hubs)]
    if fvals is not None:
        parts.append(_u32(fvals))
    parts += [_u64(labels.bwd_offsets[1:]), _u32(labels.bwd_hubs)]
    if bvals is not None:
        parts.append(_u32(bvals))
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def deserialize_labels(data):
    """Inverse of :func:`serialize_labels`; validates magic, version, size and CRC."""
    data = bytes(data)
    if len(data) < _HEADER.size + 4:
        raise LabelStoreError("truncated label store")
    magic, version, kind, mode, flags, _, n, n_hubs, nf, nb = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise LabelStoreError("bad magic")
    if version != FORMAT_VERSION:
        raise LabelStoreError(f"unsupported format version {version}")
    if kind not in (_KIND_EVENT, _KIND_STOP):
        raise LabelStoreError(f"unknown label kind {kind}")
    with_vals = kind == _KIND_STOP or mode == 1
    expected = _HEADER.size + 12 * n_hubs + 16 * n + 4 * (nf + nb) * (1 + with_vals) + 4
    if len(data) != expected:
        raise LabelStoreError("truncated label store" if len(data) < expected else "trailing bytes")
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != crc:
        raise LabelStoreError("checksum mismatch")

    pos = _HEADER.size

    def take(count, dtype):
        nonlocal pos
        width = np.dtype(dtype).itemsize
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        pos += count * width
        return arr.astype(np.int64)

    hub_vertex, hub_time, hub_stop = (take(n_hubs, "<u4") for _ in range(3))
    f_off = np.concatenate([[0], take(n, "<u8")]).astype(np.int64)
    f_hubs = take(nf, "<u4").astype(np.int32)
    f_vals = take(nf, "<u4") if with_vals else None
    b_off = np.concatenate([[0], take(n, "<u8")]).astype(np.int64)
    b_hubs = take(nb, "<u4").astype(np.int32)
    b_vals = take(nb, "<u4") if with_vals else None
    if kind == _KIND_STOP:
        return StopLabelSet(f_off, f_hubs, f_vals, b_off, b_hubs, b_vals,
                            hub_vertex, hub_time, hub_stop, reassigned=bool(flags & 2))
    return LabelSet(DISTANCE if mode else REACHABILITY, f_off, f_hubs, b_off, b_hubs,
                    hub_vertex, hub_time, hub_stop, f_vals, b_vals,
                    trimmed=bool(flags & 1), reassigned=bool(flags & 2))


def save_labels(labels, path):
    with open(path, "wb") as fh:
        fh.write(serialize_labels(labels))


def load_labels(path):
    with open(path, "rb") as fh:
        return deserialize_labels(fh.read())
