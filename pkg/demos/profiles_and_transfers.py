"""
Profiles and the arrival/transfer trade-off
===========================================

"""

from pathlib import Path

from ptlabel import LabelStore, generate_timetable, parse_timetable

data = Path(__file__).resolve().parent.parent / "tests" / "data"
tt = parse_timetable((data / "fixture_a.tsv").read_text())
store = LabelStore.build(tt)

# a profile lists every departure worth taking: leaving later never arrives earlier
for e in store.profile("A", "D"):
    print(f"depart {e.departure:>4}  arrive {e.arrival:>4}")

# the stop-label engine gives the same set from a single sweep
print(store.profile("A", "D", "stop_labels") == store.profile("A", "D"))

# multicriteria answers trade arrival time against transfers
print(store.mc("A", "D", 0).entries)

# transfer times change the answers; here a slow change at B and C
from ptlabel.timetable import with_mtt

slow = LabelStore.build(with_mtt(tt, {"B": 150, "C": 100}))
print(slow.mc("A", "D", 0).entries)

# on a generated network the profiles get longer
big = LabelStore.build(generate_timetable(60, 150, seed=3))
names = big.tt.stop_names
src, dst = max(((s, t) for s in names[:15] for t in names if s != t),
               key=lambda st: len(big.profile(*st)))
prof = big.profile(src, dst)
print(len(prof), "tight departures from", src, "to", dst)
for e in prof[:5]:
    print(f"depart {e.departure:>6}  arrive {e.arrival:>6}")
