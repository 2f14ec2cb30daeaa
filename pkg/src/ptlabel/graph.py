"""Time-expanded graphs for earliest-arrival (EA) and multicriteria (MC) search."""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .timetable import ARR, DEP

EA = "ea"
MC = "mc"

EVENT = 0
CONNECTION = 1

WAITING, CONN_ARC, FOOT, TRIP_LINK = range(4)


class GraphCycleError(RuntimeError):
    pass


def csr(n, tails, heads, costs):
    order = np.lexsort((heads, tails))
    tails, heads, costs = tails[order], heads[order], costs[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=n), out=indptr[1:])
    return indptr, heads.astype(np.int32), costs.astype(np.int64)


@dataclass(frozen=True, eq=False)
class TimeExpandedGraph:
    mode: str
    n_events: int
    vertex_stop: np.ndarray
    vertex_time: np.ndarray
    vertex_kind: np.ndarray
    vertex_flags: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    rindptr: np.ndarray = field(repr=False)
    rindices: np.ndarray = field(repr=False)
    rcosts: np.ndarray = field(repr=False)
    arc_counts: dict = field(default_factory=dict)

    @property
    def n_vertices(self):
        return int(self.vertex_time.size)

    @property
    def n_arcs(self):
        return int(self.indices.size)

    def out_arcs(self, v):
        a, b = self.indptr[v], self.indptr[v + 1]
        return zip(self.indices[a:b].tolist(), self.costs[a:b].tolist())

    def in_arcs(self, v):
        a, b = self.rindptr[v], self.rindptr[v + 1]
        return zip(self.rindices[a:b].tolist(), self.rcosts[a:b].tolist())

    def arcs(self):
        """All arcs as ``(tail, head, cost)`` arrays."""
        tails = np.repeat(np.arange(self.n_vertices), np.diff(self.indptr))
        return tails, self.indices.astype(np.int64), self.costs


def _base_arcs(tt):
    """Waiting, connection and foot arcs between event vertices (tail, head, kind)."""
    es, et = tt.event_stop, tt.event_time
    same = np.flatnonzero(es[1:] == es[:-1])
    parts = [(same, same + 1, WAITING), (tt.conn_dep_event, tt.conn_arr_event, CONN_ARC)]
    off = tt.stop_event_offsets
    for a, b, d in zip(tt.fp_from.tolist(), tt.fp_to.tolist(), tt.fp_dur.tolist()):
        src = np.arange(off[a], off[a + 1])
        tb = et[off[b]:off[b + 1]]
        pos = np.searchsorted(tb, et[src] + d, side="left")
        ok = pos < tb.size
        parts.append((src[ok], off[b] + pos[ok], FOOT))
    tails = np.concatenate([p[0] for p in parts]).astype(np.int64)
    heads = np.concatenate([p[1] for p in parts]).astype(np.int64)
    kinds = np.concatenate([np.full(len(p[0]), p[2], np.int8) for p in parts])
    return tails, heads, kinds


def _finish(mode, n_events, vstop, vtime, vkind, vflags, tails, heads, costs, kinds):
    n = vtime.size
    # duplicate (tail, head) pairs collapse to the cheapest arc
    order = np.lexsort((costs, heads, tails))
    tails, heads, costs, kinds = tails[order], heads[order], costs[order], kinds[order]
    keep = np.ones(tails.size, dtype=bool)
    keep[1:] = (tails[1:] != tails[:-1]) | (heads[1:] != heads[:-1])
    tails, heads, costs, kinds = tails[keep], heads[keep], costs[keep], kinds[keep]
    counts = {name: int((kinds == k).sum())
              for k, name in enumerate(("waiting", "connection", "foot", "trip"))}
    indptr, indices, c = csr(n, tails, heads, costs)
    rindptr, rindices, rc = csr(n, heads, tails, costs)
    g = TimeExpandedGraph(mode, n_events, vstop, vtime, vkind, vflags,
                          indptr, indices, c, rindptr, rindices, rc, counts)
    check_acyclic(g)
    return g


def build_ea_graph(tt):
    """One vertex per unique event; arc costs are time differences."""
    tails, heads, kinds = _base_arcs(tt)
    costs = tt.event_time[heads] - tt.event_time[tails]
    n = tt.n_events
    return _finish(EA, n, tt.event_stop.copy(), tt.event_time.copy(),
                   np.zeros(n, np.int8), tt.event_flags.copy(),
                   tails, heads, costs, kinds)


def build_mc_graph(tt):
    """EA graph with each connection arc subdivided by a connection vertex.

    Entering a connection vertex is free, leaving it to the arrival event costs
    one (a trip was used); consecutive connection vertices of a trip are
    linked at zero cost so staying seated is free. Connection vertices carry
    the stop and time of their departure event.
    """
    n_ev, n_conn = tt.n_events, tt.n_connections
    tails, heads, kinds = _base_arcs(tt)
    base = kinds != CONN_ARC
    tails, heads, kinds = tails[base], heads[base], kinds[base]
    cv = n_ev + np.arange(n_conn)
    trip_of = np.repeat(np.arange(tt.n_trips), np.diff(tt.trip_offsets))
    link = np.flatnonzero(trip_of[1:] == trip_of[:-1]) if n_conn else np.zeros(0, np.int64)
    tails = np.concatenate([tails, tt.conn_dep_event, cv, cv[link]]).astype(np.int64)
    heads = np.concatenate([heads, cv, tt.conn_arr_event, cv[link + 1]]).astype(np.int64)
    costs = np.concatenate([np.zeros(base.sum() + n_conn, np.int64),
                            np.ones(n_conn, np.int64), np.zeros(link.size, np.int64)])
    kinds = np.concatenate([kinds, np.full(n_conn, CONN_ARC, np.int8),
                            np.full(n_conn, CONN_ARC, np.int8), np.full(link.size, TRIP_LINK, np.int8)])
    vstop = np.concatenate([tt.event_stop, tt.conn_dep_stop])
    vtime = np.concatenate([tt.event_time, tt.conn_dep_time])
    vkind = np.concatenate([np.zeros(n_ev, np.int8), np.ones(n_conn, np.int8)])
    vflags = np.concatenate([tt.event_flags, np.zeros(n_conn, np.int8)])
    return _finish(MC, n_ev, vstop, vtime, vkind, vflags, tails, heads, costs, kinds)


def check_acyclic(g):
    indeg = np.diff(g.rindptr).copy()
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    seen = 0
    indptr, indices = g.indptr, g.indices
    while queue:
        v = queue.popleft()
        seen += 1
        for w in indices[indptr[v]:indptr[v + 1]].tolist():
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if seen != g.n_vertices:
        raise GraphCycleError(f"cycle among {g.n_vertices - seen} vertices")


def topological_order(g):
    """Vertices in topological order, ties broken by (time, stop, kind, id)."""
    indeg = np.diff(g.rindptr).copy()
    key = lambda v: (int(g.vertex_time[v]), int(g.vertex_stop[v]), int(g.vertex_kind[v]), v)
    heap = [key(v) for v in np.flatnonzero(indeg == 0).tolist()]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)[-1]
        order.append(v)
        for w in g.indices[g.indptr[v]:g.indptr[v + 1]].tolist():
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, key(w))
    if len(order) != g.n_vertices:
        raise GraphCycleError(f"cycle among {g.n_vertices - len(order)} vertices")
    return np.array(order, dtype=np.int64)


def dump_arcs(g, fh):
    """Write one ``tail<TAB>head<TAB>cost`` line per arc."""
    tails, heads, costs = g.arcs()
    for t, h, c in zip(tails.tolist(), heads.tolist(), costs.tolist()):
        fh.write(f"{t}\t{h}\t{c}\n")


def departure_capable(g):
    return (g.vertex_kind == EVENT) & ((g.vertex_flags & DEP) != 0)


def arrival_capable(g):
    return (g.vertex_kind == EVENT) & ((g.vertex_flags & ARR) != 0)
