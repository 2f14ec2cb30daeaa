"""
How much of the labels does each query variant read?
====================================================

"""

import time

from ptlabel import LabelStore, generate_timetable
from ptlabel.cli import format_bench, run_bench

# a synthetic grid network; the same seed always gives the same timetable
tt = generate_timetable(300, 1000, seed=1)
print(tt.n_stops, "stops,", tt.n_connections, "connections")

t0 = time.perf_counter()
store = LabelStore.build(tt)
print(f"built in {time.perf_counter() - t0:.1f}s")

# every variant runs the same random queries and must agree on every answer
report = run_bench(store, 2000, seed=0)
print("\n".join(format_bench(report)))

# pruning skips hubs earlier than the departure time, binary search skips
# arrival events; labels_scanned shows the effect of each
rows = {r["variant"]: r for r in report["variants"]}
for a, b in [("event[plain]", "event[prn]"), ("event[prn]", "event[prn+bin]"),
             ("event[prn+bin]", "event[prn+hash+bin]")]:
    print(f"{a:>16} -> {b:<20} {rows[a]['labels_scanned']:6.1f} -> {rows[b]['labels_scanned']:6.1f}")
