"""Timetable model, TSV loader and minimum-transfer-time preprocessing.

Times are integer seconds since the start of the service period. Events are
kept as flat numpy arrays sorted by ``(stop, time)``; ``stop_event_offsets``
slices them per stop.
"""
from __future__ import annotations

import bisect
import io
import re
from collections import namedtuple
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

INFINITY = 2**32 - 1

DEP = 1
ARR = 2
BOTH = DEP | ARR


class TimetableError(ValueError):
    """Invalid timetable content."""


def _check_trip(tname, conns, n_stops, arrivals_shifted=False):
    if not conns:
        raise TimetableError(f"trip {tname!r} has no connections")
    last_time = None
    for k, (a, dt, b, at) in enumerate(conns):
        for s in (a, b):
            if not 0 <= s < n_stops:
                raise TimetableError(f"trip {tname!r}: unknown stop reference {s}")
        for x in (dt, at):
            if x < 0:
                raise TimetableError(f"trip {tname!r}: negative time {x}")
            if x >= INFINITY:
                raise TimetableError(f"trip {tname!r}: time overflow {x}")
        if at < dt:
            raise TimetableError(f"trip {tname!r}: non-monotone trip (arrival before departure)")
        if k and a != conns[k - 1][2]:
            raise TimetableError(f"trip {tname!r}: departs from a stop it did not arrive at")
        # shifted arrivals may overtake the next departure of the same trip
        if not arrivals_shifted and last_time is not None and dt < last_time:
            raise TimetableError(f"trip {tname!r}: non-monotone trip")
        last_time = at


class TimetableSyntaxError(TimetableError):
    def __init__(self, msg, line, col=1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def _check_zero_time_cycles(dep_ev, arr_ev, instant):
    """Zero-duration connections must not lead back to their own event."""
    tails, heads = dep_ev[instant].tolist(), arr_ev[instant].tolist()
    succ, indeg = {}, {}
    for a, b in zip(tails, heads):
        succ.setdefault(a, []).append(b)
        indeg[b] = indeg.get(b, 0) + 1
        indeg.setdefault(a, 0)
    queue = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in succ.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if seen != len(indeg):
        raise TimetableError("zero-duration connections form a cycle")


MergedEvents = namedtuple("MergedEvents", "stop time flags index")


def merge_coincident_events(stops, times, flags):
    """Merge raw events sharing ``(stop, time)``.

    Returns the unique events sorted by ``(stop, time)`` with capability
    flags OR-ed together, plus ``index`` mapping each raw event to its merged
    event. Applying it to its own output is the identity.
    """
    stops = np.asarray(stops, dtype=np.int64)
    times = np.asarray(times, dtype=np.int64)
    flags = np.asarray(flags, dtype=np.int8)
    if stops.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return MergedEvents(empty, empty.copy(), np.zeros(0, np.int8), empty.copy())
    order = np.lexsort((times, stops))
    s, t = stops[order], times[order]
    new = np.ones(s.size, dtype=bool)
    new[1:] = (s[1:] != s[:-1]) | (t[1:] != t[:-1])
    starts = np.flatnonzero(new)
    merged_flags = np.bitwise_or.reduceat(flags[order], starts).astype(np.int8)
    index = np.empty(s.size, dtype=np.int64)
    index[order] = np.cumsum(new) - 1
    return MergedEvents(s[starts], t[starts], merged_flags, index)


@dataclass(frozen=True, eq=False)
class Timetable:
    """Validated, immutable timetable.

    Connections are stored trip by trip; ``trip_offsets[k]:trip_offsets[k+1]``
    are the connections of trip ``k``. Footpaths are directed.
    """

    stop_names: list
    stop_mtt: np.ndarray
    trip_names: list
    trip_offsets: np.ndarray
    conn_dep_stop: np.ndarray
    conn_dep_time: np.ndarray
    conn_arr_stop: np.ndarray
    conn_arr_time: np.ndarray
    fp_from: np.ndarray
    fp_to: np.ndarray
    fp_dur: np.ndarray
    event_stop: np.ndarray = field(repr=False)
    event_time: np.ndarray = field(repr=False)
    event_flags: np.ndarray = field(repr=False)
    stop_event_offsets: np.ndarray = field(repr=False)
    conn_dep_event: np.ndarray = field(repr=False)
    conn_arr_event: np.ndarray = field(repr=False)
    stop_parent: np.ndarray = field(repr=False)
    parent_names: list = field(repr=False)
    arrivals_shifted: bool = False

    @classmethod
    def build(cls, stops, trips, footpaths, *, mirror_footpaths=True,
              parents=None, arrivals_shifted=False):
        """Validate raw parts and assemble a timetable.

        ``stops`` is a list of ``(name, mtt)``, ``trips`` a list of
        ``(name, connections)`` with connections as
        ``(dep_stop, dep_time, arr_stop, arr_time)`` over stop indices, and
        ``footpaths`` a list of ``(from, to, duration)``.
        """
        names = [str(n) for n, _ in stops]
        if len(set(names)) != len(names):
            raise TimetableError("duplicate stop id")
        mtt = np.array([int(m) for _, m in stops], dtype=np.int64)
        if mtt.size and (mtt.min() < 0 or mtt.max() >= INFINITY):
            raise TimetableError("minimum transfer time out of range")
        n_stops = len(names)

        trip_names, offsets, rows = [], [0], []
        for tname, conns in trips:
            conns = list(conns)
            _check_trip(tname, conns, n_stops, arrivals_shifted)
            rows.extend(conns)
            trip_names.append(str(tname))
            offsets.append(len(rows))
        conn = np.array(rows, dtype=np.int64).reshape(-1, 4)

        fps = {}
        for a, b, d in footpaths:
            if not (0 <= a < n_stops and 0 <= b < n_stops):
                raise TimetableError("footpath: unknown stop reference")
            if a == b:
                raise TimetableError("footpath: self-loop")
            if d <= 0:
                raise TimetableError(f"footpath: non-positive duration {d}")
            if d >= INFINITY:
                raise TimetableError("footpath: duration overflow")
            fps[a, b] = min(d, fps.get((a, b), d))
        if mirror_footpaths:
            for (a, b), d in list(fps.items()):
                fps.setdefault((b, a), d)
        fp = np.array(sorted((a, b, d) for (a, b), d in fps.items()), dtype=np.int64).reshape(-1, 3)

        n_conn = conn.shape[0]
        raw_stop = np.concatenate([conn[:, 0], conn[:, 2]])
        raw_time = np.concatenate([conn[:, 1], conn[:, 3]])
        raw_flag = np.concatenate([np.full(n_conn, DEP, np.int8), np.full(n_conn, ARR, np.int8)])
        ev = merge_coincident_events(raw_stop, raw_time, raw_flag)
        stop_offsets = np.searchsorted(ev.stop, np.arange(n_stops + 1)).astype(np.int64)
        _check_zero_time_cycles(ev.index[:n_conn], ev.index[n_conn:], conn[:, 1] == conn[:, 3])

        if parents is None:
            parent = np.arange(n_stops, dtype=np.int64)
            parent_names = list(names)
        else:
            parent, parent_names = parents
            parent = np.asarray(parent, dtype=np.int64)

        return cls(
            stop_names=names,
            stop_mtt=mtt,
            trip_names=trip_names,
            trip_offsets=np.array(offsets, dtype=np.int64),
            conn_dep_stop=conn[:, 0].copy(),
            conn_dep_time=conn[:, 1].copy(),
            conn_arr_stop=conn[:, 2].copy(),
            conn_arr_time=conn[:, 3].copy(),
            fp_from=fp[:, 0].copy(),
            fp_to=fp[:, 1].copy(),
            fp_dur=fp[:, 2].copy(),
            event_stop=ev.stop,
            event_time=ev.time,
            event_flags=ev.flags,
            stop_event_offsets=stop_offsets,
            conn_dep_event=ev.index[:n_conn].copy(),
            conn_arr_event=ev.index[n_conn:].copy(),
            stop_parent=parent,
            parent_names=list(parent_names),
            arrivals_shifted=arrivals_shifted,
        )

    @property
    def n_stops(self):
        return len(self.stop_names)

    @property
    def n_trips(self):
        return len(self.trip_names)

    @property
    def n_connections(self):
        return int(self.conn_dep_stop.size)

    @property
    def n_events(self):
        return int(self.event_time.size)

    @property
    def raw_event_count(self):
        return 2 * self.n_connections

    def stop_index(self, name):
        try:
            return self.stop_names.index(name)
        except ValueError:
            raise KeyError(f"unknown stop {name!r}") from None

    def events_at(self, stop):
        """Event ids at ``stop`` in time order (a ``range``)."""
        o = self.stop_event_offsets
        return range(int(o[stop]), int(o[stop + 1]))

    def events_by_stop(self):
        """Per-stop list of ``(time, flags)`` pairs."""
        return [
            [(int(self.event_time[e]), int(self.event_flags[e])) for e in self.events_at(p)]
            for p in range(self.n_stops)
        ]

    def trip_connections(self, k):
        a, b = self.trip_offsets[k], self.trip_offsets[k + 1]
        return [
            (int(self.conn_dep_stop[c]), int(self.conn_dep_time[c]),
             int(self.conn_arr_stop[c]), int(self.conn_arr_time[c]))
            for c in range(a, b)
        ]

    def members(self, name):
        """Stops derived from the original stop ``name`` (several after splitting)."""
        try:
            p = self.parent_names.index(name)
        except ValueError:
            raise KeyError(f"unknown stop {name!r}") from None
        return [int(s) for s in np.flatnonzero(self.stop_parent == p)]

    def _capable(self, flag):
        mask = (self.event_flags & flag) != 0
        events = np.flatnonzero(mask)
        offsets = np.searchsorted(self.event_stop[events], np.arange(self.n_stops + 1)).astype(np.int64)
        return offsets, events.astype(np.int64), self.event_time[events].astype(np.int64)

    @cached_property
    def departures(self):
        """Departure-capable events per stop as ``(offsets, event ids, times)``."""
        return self._capable(DEP)

    @cached_property
    def arrivals(self):
        """Arrival-capable events per stop as ``(offsets, event ids, times)``."""
        return self._capable(ARR)

    def last_event_time(self):
        return int(self.event_time.max()) if self.n_events else 0

    def _parts(self):
        stops = list(zip(self.stop_names, self.stop_mtt.tolist()))
        trips = [(self.trip_names[k], self.trip_connections(k)) for k in range(self.n_trips)]
        fps = list(zip(self.fp_from.tolist(), self.fp_to.tolist(), self.fp_dur.tolist()))
        return stops, trips, fps


# --------------------------------------------------------------------------
# TSV format

_INT = re.compile(r"^\d+$")


def _parse_int(tok, line, col, what):
    tok = tok.strip()
    if not _INT.match(tok):
        raise TimetableSyntaxError(f"expected non-negative integer {what}, got {tok!r}", line, col)
    v = int(tok)
    if v >= INFINITY:
        raise TimetableError(f"line {line}: time overflow {v}")
    return v


def parse_timetable(source):
    """Parse the sectioned TSV format (``#stops``, ``#trips``, ``#footpaths``).

    ``source`` may be a string or a text stream.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    section = None
    stops, stop_ix, raw_trips, raw_fps = [], {}, [], []
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\r\n")
        cut = line.find("//")
        if cut >= 0:
            # a comment may follow a tab, which must not become an empty column
            line = line[:cut].rstrip()
        if not line.strip():
            continue
        if line.startswith("#"):
            section = line.strip()[1:]
            if section not in ("stops", "trips", "footpaths"):
                raise TimetableSyntaxError(f"unknown section {line.strip()!r}", lineno)
            continue
        if section is None:
            raise TimetableSyntaxError("data before any section header", lineno)
        cols = line.split("\t")
        if section == "stops":
            if len(cols) != 2:
                raise TimetableSyntaxError("expected 'stop<TAB>mtt'", lineno)
            name = cols[0].strip()
            if not name:
                raise TimetableSyntaxError("empty stop id", lineno)
            if name in stop_ix:
                raise TimetableSyntaxError(f"duplicate stop {name!r}", lineno)
            mtt = _parse_int(cols[1], lineno, len(cols[0]) + 2, "mtt")
            stop_ix[name] = len(stops)
            stops.append((name, mtt))
        elif section == "trips":
            if len(cols) != 2:
                raise TimetableSyntaxError("expected 'trip<TAB>stop@time>stop@time...'", lineno)
            col = len(cols[0]) + 2
            events = []
            for tok in cols[1].split(">"):
                if tok.count("@") != 1:
                    raise TimetableSyntaxError(f"expected stop@time, got {tok!r}", lineno, col)
                name, t = tok.split("@")
                events.append((name.strip(), _parse_int(t, lineno, col + len(name) + 1, "time"), col))
                col += len(tok) + 1
            if len(events) < 2 or len(events) % 2:
                raise TimetableSyntaxError("trip needs alternating departure/arrival pairs", lineno)
            raw_trips.append((cols[0].strip(), events, lineno))
        else:
            if len(cols) != 3:
                raise TimetableSyntaxError("expected 'from<TAB>to<TAB>duration'", lineno)
            d = _parse_int(cols[2], lineno, len(cols[0]) + len(cols[1]) + 3, "duration")
            raw_fps.append((cols[0].strip(), cols[1].strip(), d, lineno))

    def resolve(name, lineno, col=1):
        try:
            return stop_ix[name]
        except KeyError:
            raise TimetableSyntaxError(f"unknown stop reference {name!r}", lineno, col) from None

    trips = []
    for tname, events, lineno in raw_trips:
        conns = []
        for k in range(0, len(events), 2):
            (a, dt, ca), (b, at, cb) = events[k], events[k + 1]
            conns.append((resolve(a, lineno, ca), dt, resolve(b, lineno, cb), at))
        try:
            _check_trip(tname, conns, len(stops))
        except TimetableError as exc:
            raise TimetableError(f"line {lineno}: {exc}") from None
        trips.append((tname, conns))
    fps = [(resolve(a, ln), resolve(b, ln), d) for a, b, d, ln in raw_fps]
    return Timetable.build(stops, trips, fps)


def format_timetable(tt):
    """Serialize ``tt`` to the TSV format; footpaths are written in both directions."""
    out = ["#stops"]
    out += [f"{n}\t{int(m)}" for n, m in zip(tt.stop_names, tt.stop_mtt)]
    out.append("#trips")
    names = tt.stop_names
    for k, tname in enumerate(tt.trip_names):
        toks = []
        for a, dt, b, at in tt.trip_connections(k):
            toks += [f"{names[a]}@{dt}", f"{names[b]}@{at}"]
        out.append(f"{tname}\t{'>'.join(toks)}")
    out.append("#footpaths")
    for a, b, d in zip(tt.fp_from.tolist(), tt.fp_to.tolist(), tt.fp_dur.tolist()):
        out.append(f"{names[a]}\t{names[b]}\t{d}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# minimum transfer times

def _stop_visits(tt):
    """Per stop: ``{trip: (arrival times, departure times)}`` at that stop."""
    visits = [dict() for _ in range(tt.n_stops)]
    trip_of = np.repeat(np.arange(tt.n_trips), np.diff(tt.trip_offsets))
    for k, a, dt, b, at in zip(trip_of.tolist(), tt.conn_dep_stop.tolist(), tt.conn_dep_time.tolist(),
                               tt.conn_arr_stop.tolist(), tt.conn_arr_time.tolist()):
        visits[a].setdefault(k, ([], []))[1].append(dt)
        visits[b].setdefault(k, ([], []))[0].append(at)
    return visits


def mtt_conflicts(tt, stop, visits=None):
    """Pairs of trips at ``stop`` between which a transfer is ruled out by its mtt.

    Trips ``a`` and ``b`` conflict when one arrives at ``ta`` and the other
    departs at ``tb`` with ``ta <= tb < ta + mtt``.
    """
    mtt = int(tt.stop_mtt[stop])
    if visits is None:
        visits = _stop_visits(tt)[stop]
    deps = sorted((d, k) for k, (_, ds) in visits.items() for d in ds)
    dep_times = [d for d, _ in deps]
    out = set()
    if mtt <= 0:
        return out
    for a, (arrs, _) in visits.items():
        for ta in arrs:
            lo = bisect.bisect_left(dep_times, ta)
            hi = bisect.bisect_left(dep_times, ta + mtt)
            for _, b in deps[lo:hi]:
                if b != a:
                    out.add((min(a, b), max(a, b)))
    return out


def color_trips(tt, stop, visits=None):
    """Greedy first-fit coloring of the trips serving ``stop``.

    Trips are taken in order of their first event time at the stop; each gets
    the smallest color not used by an already colored conflicting trip.
    """
    if visits is None:
        visits = _stop_visits(tt)[stop]
    conflicts = mtt_conflicts(tt, stop, visits)
    adj = {k: set() for k in visits}
    for a, b in conflicts:
        adj[a].add(b)
        adj[b].add(a)
    order = sorted(visits, key=lambda k: (min(visits[k][0] + visits[k][1]), k))
    color = {}
    for k in order:
        used = {color[j] for j in adj[k] if j in color}
        c = 0
        while c in used:
            c += 1
        color[k] = c
    return color


def split_stops_for_mtt_ea(tt):
    """Encode minimum transfer times structurally for the EA graph.

    Each stop with ``mtt > 0`` whose trips conflict is replaced by one stop per
    color of a greedy coloring of its conflict graph; the new stops are joined
    pairwise by footpaths of length mtt and inherit the original footpaths.
    All resulting stops have ``mtt == 0``.
    """
    colorings = {}
    visits = _stop_visits(tt)
    for p in range(tt.n_stops):
        if tt.stop_mtt[p] > 0:
            col = color_trips(tt, p, visits[p])
            if col and max(col.values()) > 0:
                colorings[p] = col

    new_stops, members, parent = [], {}, []
    for p, name in enumerate(tt.stop_names):
        par = int(tt.stop_parent[p])
        if p in colorings:
            k = max(colorings[p].values()) + 1
            members[p] = list(range(len(new_stops), len(new_stops) + k))
            for c in range(k):
                new_stops.append((f"{name}~{c}", 0))
                parent.append(par)
        else:
            members[p] = [len(new_stops)]
            new_stops.append((name, 0))
            parent.append(par)

    def member(p, trip):
        if p in colorings:
            return members[p][colorings[p][trip]]
        return members[p][0]

    trips = []
    for k in range(tt.n_trips):
        trips.append((tt.trip_names[k], [
            (member(a, k), dt, member(b, k), at) for a, dt, b, at in tt.trip_connections(k)
        ]))

    fps = []
    for a, b, d in zip(tt.fp_from.tolist(), tt.fp_to.tolist(), tt.fp_dur.tolist()):
        for ma in members[a]:
            for mb in members[b]:
                fps.append((ma, mb, d))
    for p in colorings:
        ms, mtt = members[p], int(tt.stop_mtt[p])
        for x in ms:
            for y in ms:
                if x != y:
                    fps.append((x, y, mtt))
    return Timetable.build(new_stops, trips, fps, mirror_footpaths=False,
                           parents=(parent, tt.parent_names))


def shift_arrivals_for_mtt_mc(tt):
    """Delay every arrival by the transfer time of its stop (for the MC graph).

    Arrival times in the result are "ready to board" times; answers computed
    on it report arrivals including the target's transfer time.
    """
    if not tt.stop_mtt.any():
        return tt
    stops, trips, fps = tt._parts()
    mtt = tt.stop_mtt
    shifted = []
    for name, conns in trips:
        row = []
        for a, dt, b, at in conns:
            at2 = at + int(mtt[b])
            if at2 >= INFINITY:
                raise TimetableError(f"trip {name!r}: time overflow after transfer-time shift")
            row.append((a, dt, b, at2))
        shifted.append((name, row))
    return Timetable.build(stops, shifted, fps, mirror_footpaths=False,
                           parents=(tt.stop_parent, tt.parent_names),
                           arrivals_shifted=True)


def with_mtt(tt, mtt):
    """Copy of ``tt`` with per-stop transfer times replaced (array or mapping name->seconds)."""
    if isinstance(mtt, dict):
        arr = tt.stop_mtt.copy()
        for name, v in mtt.items():
            arr[tt.stop_index(name)] = v
    else:
        arr = np.asarray(mtt, dtype=np.int64)
    return replace(tt, stop_mtt=arr)
