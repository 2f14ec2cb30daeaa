"""Command line: ``ptlabel build | query | gen | bench``.

Exit codes are 0 on success, 1 on errors and 2 when a query finds no journey.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict

import numpy as np

from .labeling import LabelStoreError
from .query import EVENT_LABELS, STOP_LABELS, EaQuery, EaVariantFlags, ea_query
from .store import MODES, MTT_STRATEGIES, ORDERINGS, BuildConfig, ConfigError, LabelStore
from .synth import SHAPES, generate_timetable
from .timetable import INFINITY, TimetableError, format_timetable, parse_timetable

OK, ERROR, UNREACHABLE = 0, 1, 2
ENGINES = {"event": EVENT_LABELS, "stop": STOP_LABELS}


class VariantMismatch(RuntimeError):
    pass


def parse_time(text):
    """Seconds, or ``HH:MM`` / ``HH:MM:SS``."""
    parts = text.split(":")
    if len(parts) == 1:
        return int(parts[0])
    if len(parts) not in (2, 3):
        raise ValueError(f"bad time {text!r}")
    h, m, s = (int(p) for p in parts + ["0"] * (3 - len(parts)))
    return 3600 * h + 60 * m + s


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _stats_line(stats):
    return (f"labels_scanned={stats.labels_scanned} hubs_scanned={stats.hubs_scanned} "
            f"hubs_matched={stats.hubs_matched}")


# --------------------------------------------------------------------------

def cmd_build(args):
    config = BuildConfig(args.mode, args.ordering, args.mtt, args.seed)
    with open(args.timetable) as fh:
        tt = parse_timetable(fh)
    t0 = time.perf_counter()
    store = LabelStore.build(tt, config)
    elapsed = time.perf_counter() - t0
    store.save(args.out)
    stats = store.stats()
    stats["build_seconds"] = round(elapsed, 3)
    lines = [f"stops={stats['stops']} trips={stats['trips']} connections={stats['connections']} "
             f"events={stats['events']} build={elapsed:.2f}s"]
    if "ea" in stats:
        ea = stats["ea"]
        lines.append(f"ea: hubs/label={ea['event_labels']['hubs_per_label']:.2f} "
                     f"hubs/stop={ea['stop_labels']['hubs_per_stop']:.2f} "
                     f"bytes={ea['bytes_event']}+{ea['bytes_stop']}")
    if "mc" in stats:
        mc = stats["mc"]
        lines.append(f"mc: hubs/label={mc['labels']['hubs_per_label']:.2f} bytes={mc['bytes']}")
    _emit(args, stats, lines)
    return OK


def _flags(args):
    return EaVariantFlags(args.pruning, args.hashing, args.binary_search, ENGINES[args.engine])


def cmd_query(args):
    store = LabelStore.load(args.store)
    kind, a = args.kind, args.args
    need = {"ea": 3, "profile": 2, "mc": 3, "loc-ea": 3, "loc-profile": 2}[kind]
    if len(a) != need:
        raise ConfigError(f"query {kind} takes {need} arguments")
    if kind in ("ea", "loc-ea"):
        tau = parse_time(a[2])
        if kind == "ea":
            ans = store.ea(a[0], a[1], tau, _flags(args))
        else:
            ans = store.loc_ea(a[0], a[1], tau, pruning=args.pruning)
        if args.json:
            _emit(args, {"arrival": ans.arrival if ans.reachable else None,
                         "stats": asdict(ans.stats)}, [])
        else:
            print(ans.arrival if ans.reachable else "unreachable")
            print(_stats_line(ans.stats), file=sys.stderr)
        return OK if ans.reachable else UNREACHABLE
    if kind in ("profile", "loc-profile"):
        if kind == "profile":
            prof = store.profile(a[0], a[1], ENGINES[args.engine])
        else:
            prof = store.loc_profile(a[0], a[1])
        _emit(args, {"profile": [[e.departure, e.arrival] for e in prof]},
              [f"{e.departure}\t{e.arrival}" for e in prof] or ["unreachable"])
        return OK if prof else UNREACHABLE
    ans = store.mc(a[0], a[1], parse_time(a[2]), pruning=args.pruning)
    _emit(args, {"pareto": [list(e) for e in ans.entries]},
          [f"{arr}\t{tr}" for arr, tr in ans.entries] or ["unreachable"])
    return OK if ans.entries else UNREACHABLE


def cmd_gen(args):
    tt = generate_timetable(args.stops, args.trips, seed=args.seed, shape=args.shape,
                            n_footpaths=args.footpaths, mtt_max=args.mtt_max)
    text = format_timetable(tt)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return OK


def random_queries(tt, n, seed):
    """``n`` random ``(s, t, tau)`` with tau uniform over the timetable's day."""
    rng = np.random.default_rng(seed)
    if tt.n_stops == 0:
        return []
    s = rng.integers(0, tt.n_stops, size=n)
    t = rng.integers(0, tt.n_stops, size=n)
    tau = rng.integers(0, tt.last_event_time() + 1, size=n)
    return [EaQuery(int(a), int(b), int(c)) for a, b, c in zip(s, t, tau)]


def run_bench(store, n_queries, seed=0):
    """Run every EA variant over the same random queries; returns the report dict.

    Raises :class:`VariantMismatch` if two variants disagree on any answer.
    """
    if store.ls is None:
        raise ConfigError("bench needs EA labels")
    queries = random_queries(store.ea_tt, n_queries, seed)
    variants = EaVariantFlags.all_variants()
    answers, counts = {}, {}
    rows = []
    for flags in variants:
        # the first call of each kernel may load compiled code; keep it out of the
        # timing (some queries return before reaching a kernel, so warm up on several)
        for q in queries[:20]:
            ea_query(q, flags, ls=store.ls, sls=store.sls, tt=store.ea_tt)
        arr = np.zeros(len(queries), np.int64)
        st = np.zeros((len(queries), 3), np.int64)
        t0 = time.perf_counter()
        for i, q in enumerate(queries):
            a = ea_query(q, flags, ls=store.ls, sls=store.sls, tt=store.ea_tt)
            arr[i] = a.arrival
            st[i] = (a.stats.labels_scanned, a.stats.hubs_scanned, a.stats.hubs_matched)
        elapsed = time.perf_counter() - t0
        answers[flags], counts[flags] = arr, st
        n = max(len(queries), 1)
        rows.append({
            "variant": flags.name(), "engine": flags.engine, "pruning": flags.pruning,
            "hashing": flags.hashing, "binary_search": flags.binary_search,
            "labels_scanned": float(st[:, 0].sum() / n), "hubs_scanned": float(st[:, 1].sum() / n),
            "hubs_matched": float(st[:, 2].sum() / n), "latency_us": 1e6 * elapsed / n,
            "checksum": int(np.where(arr == INFINITY, -1, arr).sum()),
        })
    ref = answers[variants[0]]
    for flags in variants[1:]:
        bad = np.flatnonzero(answers[flags] != ref)
        if bad.size:
            q = queries[int(bad[0])]
            raise VariantMismatch(f"{flags.name()} disagrees with {variants[0].name()} on "
                                  f"{q}: {int(answers[flags][bad[0]])} != {int(ref[bad[0]])}")
    # pruning must not add work on any single query
    pruning_violations = 0
    for flags in variants:
        if flags.pruning:
            base = counts[EaVariantFlags(False, flags.hashing, flags.binary_search, flags.engine)]
            pruning_violations += int((counts[flags][:, :2] > base[:, :2]).any(axis=1).sum())
    reachable = int((ref != INFINITY).sum())
    return {"queries": len(queries), "seed": seed, "reachable": reachable,
            "pruning_violations": pruning_violations, "variants": rows}


def format_bench(report):
    head = f"{'variant':<22}{'labels':>10}{'hubs':>10}{'=':>8}{'us':>10}  checksum"
    lines = [f"{report['queries']} queries, {report['reachable']} reachable, "
             f"seed {report['seed']}", head]
    for r in report["variants"]:
        lines.append(f"{r['variant']:<22}{r['labels_scanned']:>10.1f}{r['hubs_scanned']:>10.1f}"
                     f"{r['hubs_matched']:>8.2f}{r['latency_us']:>10.1f}  {r['checksum']}")
    lines.append(f"pruning violations: {report['pruning_violations']}")
    return lines


def cmd_bench(args):
    store = LabelStore.load(args.store)
    report = run_bench(store, args.queries, args.seed)
    _emit(args, report, format_bench(report))
    return OK


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 always means "unreachable"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = _Parser(prog="ptlabel", description="Hub-labeling journey planner.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", parents=[common], help="build a label store from a timetable")
    b.add_argument("timetable")
    b.add_argument("-o", "--out", required=True, help="store directory")
    b.add_argument("--mode", choices=MODES, default="both")
    b.add_argument("--ordering", choices=ORDERINGS, default="sampled")
    b.add_argument("--mtt", choices=MTT_STRATEGIES, default="auto",
                   help="transfer times: split stops (ea), shift arrivals (mc), auto or none")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", parents=[common], help="run one query against a store")
    q.add_argument("store")
    q.add_argument("kind", choices=("ea", "profile", "mc", "loc-ea", "loc-profile"))
    q.add_argument("args", nargs="*",
                   help="ea/mc: SRC DST TIME; profile: SRC DST; loc-*: 'A:60,B:0' 'D:30' [TIME]")
    q.add_argument("--engine", choices=tuple(ENGINES), default="event")
    q.add_argument("--pruning", action=argparse.BooleanOptionalAction, default=True)
    q.add_argument("--hashing", action=argparse.BooleanOptionalAction, default=True)
    q.add_argument("--binary-search", action=argparse.BooleanOptionalAction, default=True)
    q.set_defaults(func=cmd_query)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic timetable")
    g.add_argument("--stops", type=int, required=True)
    g.add_argument("--trips", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--shape", choices=SHAPES, default="grid")
    g.add_argument("--footpaths", type=int, default=None)
    g.add_argument("--mtt-max", type=int, default=0)
    g.add_argument("-o", "--out", default=None)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("bench", parents=[common], help="compare all EA variants on random queries")
    r.add_argument("store")
    r.add_argument("-n", "--queries", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"ptlabel: error: {exc}", file=sys.stderr)
        return ERROR
    except (OSError, KeyError, ValueError, TimetableError, LabelStoreError, VariantMismatch) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ptlabel: error: {msg}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
