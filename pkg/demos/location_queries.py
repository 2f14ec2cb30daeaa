"""
Location to location: several stops on each end
===============================================

"""

from pathlib import Path

from ptlabel import LabelStore, parse_timetable

data = Path(__file__).resolve().parent.parent / "tests" / "data"
store = LabelStore.build(parse_timetable((data / "fixture_d.tsv").read_text()))

# two stops near home, P one minute away and Q five; the office is at Z
home, office = "P:60,Q:300", "Z:0"

# times are departure from home and arrival at the office, walks included
for tau in (0, 100, 401):
    ans = store.loc_ea(home, office, tau)
    print(f"leave at {tau:>3}:", ans.arrival if ans.reachable else "no journey")

# the profile keeps only the departures worth taking
for e in store.loc_profile(home, office):
    print(f"leave {e.departure:>4}  arrive {e.arrival:>4}")
