"""On-disk label store: the timetable, its labels and the build configuration.

A store directory holds ``timetable.tsv`` (the input as given),
``meta.json`` (configuration), ``stats.json`` and one ``.ptlb`` file per
label set. Timetables derived for transfer times (split stops, shifted
arrivals) are rebuilt on load since the derivation is deterministic.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .graph import build_ea_graph, build_mc_graph
from .labeling import (DISTANCE, REACHABILITY, build_labels, build_stop_labels, load_labels,
                       reassign_hub_ids, save_labels, serialize_labels, trim_event_labels)
from .query import (EVENT_LABELS, EaAnswer, EaQuery, EaVariantFlags, McAnswer, QueryStats,
                    ea_query, mc_query, profile_event_labels, profile_stop_labels)
from .superlabel import LocationAccess, loc_ea_query, loc_profile_query
from .timetable import (INFINITY, format_timetable, parse_timetable, shift_arrivals_for_mtt_mc,
                        split_stops_for_mtt_ea)

MODES = ("ea", "mc", "both")
ORDERINGS = ("sampled", "degree")
MTT_STRATEGIES = ("auto", "split", "shift", "none")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BuildConfig:
    mode: str = "both"
    ordering: str = "sampled"
    mtt: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"ordering must be one of {ORDERINGS}")
        if self.mtt not in MTT_STRATEGIES:
            raise ConfigError(f"mtt strategy must be one of {MTT_STRATEGIES}")
        if self.mtt == "split" and self.mode != "ea":
            raise ConfigError("stop splitting only applies to --mode ea")
        if self.mtt == "shift" and self.mode != "mc":
            raise ConfigError("arrival shifting only applies to --mode mc")

    @property
    def with_ea(self):
        return self.mode in ("ea", "both")

    @property
    def with_mc(self):
        return self.mode in ("mc", "both")


def _derived(tt, config):
    use_mtt = config.mtt != "none"
    ea_tt = split_stops_for_mtt_ea(tt) if config.with_ea and use_mtt else tt
    mc_tt = shift_arrivals_for_mtt_mc(tt) if config.with_mc and use_mtt else tt
    return ea_tt, mc_tt


@dataclass
class LabelStore:
    tt: object
    config: BuildConfig
    ea_tt: object = None
    ls: object = None
    sls: object = None
    mc_tt: object = None
    dls: object = None

    @classmethod
    def build(cls, tt, config=None):
        config = config or BuildConfig()
        ea_tt, mc_tt = _derived(tt, config)
        store = cls(tt, config)
        if config.with_ea:
            g = build_ea_graph(ea_tt)
            ls = build_labels(g, REACHABILITY, config.ordering, seed=config.seed)
            sls, ls, _ = reassign_hub_ids(build_stop_labels(ls, ea_tt), ls)
            store.ea_tt, store.ls, store.sls = ea_tt, ls, sls
        if config.with_mc:
            g = build_mc_graph(mc_tt)
            dls = build_labels(g, DISTANCE, config.ordering, seed=config.seed)
            store.mc_tt, store.dls = mc_tt, dls
        return store

    def stats(self):
        out = {"stops": self.tt.n_stops, "trips": self.tt.n_trips,
               "connections": self.tt.n_connections, "events": self.tt.n_events}
        if self.ls is not None:
            trimmed = trim_event_labels(self.ls, self.ea_tt)
            out["ea"] = {
                "stops": self.ea_tt.n_stops,
                "event_labels": self.ls.stats(),
                "trimmed_event_labels": trimmed.stats(),
                "stop_labels": self.sls.stats(),
                "bytes_event": len(serialize_labels(self.ls)),
                "bytes_stop": len(serialize_labels(self.sls)),
            }
        if self.dls is not None:
            out["mc"] = {"labels": self.dls.stats(), "bytes": len(serialize_labels(self.dls))}
        return out

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        with open(os.path.join(path, "timetable.tsv"), "w") as fh:
            fh.write(format_timetable(self.tt))
        meta = {"format": 1, "mode": self.config.mode, "ordering": self.config.ordering,
                "mtt": self.config.mtt, "seed": self.config.seed}
        with open(os.path.join(path, "meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
        with open(os.path.join(path, "stats.json"), "w") as fh:
            json.dump(self.stats(), fh, indent=2, sort_keys=True)
        for name, labels in (("ea", self.ls), ("stops", self.sls), ("mc", self.dls)):
            if labels is not None:
                save_labels(labels, os.path.join(path, f"{name}.ptlb"))

    @classmethod
    def load(cls, path):
        meta_path = os.path.join(path, "meta.json")
        if not os.path.exists(meta_path):
            raise FileNotFoundError(f"no label store at {path}")
        with open(meta_path) as fh:
            meta = json.load(fh)
        config = BuildConfig(meta["mode"], meta["ordering"], meta["mtt"], meta["seed"])
        with open(os.path.join(path, "timetable.tsv")) as fh:
            tt = parse_timetable(fh)
        ea_tt, mc_tt = _derived(tt, config)
        store = cls(tt, config)
        if config.with_ea:
            store.ea_tt = ea_tt
            store.ls = load_labels(os.path.join(path, "ea.ptlb"))
            store.sls = load_labels(os.path.join(path, "stops.ptlb"))
        if config.with_mc:
            store.mc_tt = mc_tt
            store.dls = load_labels(os.path.join(path, "mc.ptlb"))
        return store

    # -- queries by stop name -------------------------------------------------

    def _need(self, attr, what):
        if getattr(self, attr) is None:
            raise ConfigError(f"store was built without {what} labels")

    def ea(self, source, target, tau, flags=None):
        """EA by stop name; split stops are queried through all their members."""
        self._need("ls", "EA")
        flags = flags or EaVariantFlags()
        if source == target:
            self.tt.stop_index(source)
            return EaAnswer(int(tau))
        S, T = self.ea_tt.members(source), self.ea_tt.members(target)
        if len(S) == 1 and len(T) == 1:
            return ea_query(EaQuery(S[0], T[0], int(tau)), flags, ls=self.ls, sls=self.sls,
                            tt=self.ea_tt)
        if flags.engine != EVENT_LABELS:
            return loc_ea_query(LocationAccess([(p, 0) for p in S]),
                                LocationAccess([(q, 0) for q in T]), tau, self.sls,
                                pruning=flags.pruning)
        best, total = EaAnswer(INFINITY), QueryStats()
        for p in S:
            for q in T:
                a = ea_query(EaQuery(p, q, int(tau)), flags, ls=self.ls, tt=self.ea_tt)
                for k in ("labels_scanned", "hubs_scanned", "hubs_matched"):
                    setattr(total, k, getattr(total, k) + getattr(a.stats, k))
                if a.arrival < best.arrival:
                    best = a
        return EaAnswer(best.arrival, best.matched_hub, total)

    def profile(self, source, target, engine=EVENT_LABELS):
        self._need("ls", "EA")
        if source == target:
            self.tt.stop_index(source)
            return []
        S, T = self.ea_tt.members(source), self.ea_tt.members(target)
        if len(S) == 1 and len(T) == 1:
            if engine == EVENT_LABELS:
                return profile_event_labels(S[0], T[0], self.ls, self.ea_tt)
            return profile_stop_labels(S[0], T[0], self.sls)
        return loc_profile_query(LocationAccess([(p, 0) for p in S]),
                                 LocationAccess([(q, 0) for q in T]), self.sls)

    def mc(self, source, target, tau, pruning=True):
        self._need("dls", "MC")
        s, t = self.mc_tt.stop_index(source), self.mc_tt.stop_index(target)
        if s == t:
            return McAnswer([(int(tau), 0)])
        return mc_query(EaQuery(s, t, int(tau)), self.dls, self.mc_tt, pruning=pruning)

    def access(self, text):
        """Parse ``"A:60,B:0"`` into an access set over the EA stops.

        A split stop contributes all of its members with the same walk.
        """
        entries = []
        for part in filter(None, (s.strip() for s in text.split(","))):
            name, sep, walk = part.rpartition(":")
            if not sep:
                name, walk = part, "0"
            entries += [(p, int(walk)) for p in self.ea_tt.members(name)]
        return LocationAccess(entries)

    def loc_ea(self, src, dst, tau, pruning=True):
        self._need("sls", "EA")
        return loc_ea_query(self.access(src), self.access(dst), tau, self.sls, pruning=pruning)

    def loc_profile(self, src, dst):
        self._need("sls", "EA")
        return loc_profile_query(self.access(src), self.access(dst), self.sls)
