"""
Earliest-arrival queries on a small timetable
=============================================

"""

# a timetable is plain text: stops with transfer times, trips as stop@time
# chains and undirected footpaths
from ptlabel import EaVariantFlags, LabelStore, parse_timetable

text = """
#stops
A	0
B	0
C	0
D	0
#trips
t1	A@60>B@300>B@300>C@400
t2	B@420>C@480>C@480>D@540
t3	A@240>C@500>C@500>D@660
#footpaths
B	C	120
"""
tt = parse_timetable(text)
print(tt.n_stops, "stops,", tt.n_connections, "connections,", tt.n_events, "events")

# building computes the labels once; every query afterwards only reads them
store = LabelStore.build(tt)
print(store.stats()["ea"]["stop_labels"])

# leave A at 0:00 or later and get to D as early as possible
ans = store.ea("A", "D", 0)
print("arrive at", ans.arrival, "via hub", ans.matched_hub)

# after t1 has left, only t3 remains
print("arrive at", store.ea("A", "D", 61).arrival)

# the flags change how much of the labels is read, never the answer
for flags in EaVariantFlags.all_variants():
    a = store.ea("A", "D", 0, flags)
    print(f"{flags.name():<22} {a.arrival}  labels={a.stats.labels_scanned} "
          f"hubs={a.stats.hubs_scanned}")
