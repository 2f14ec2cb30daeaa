"""Hub labeling for public transit: earliest-arrival, profile and
multicriteria queries answered from precomputed labels on a time-expanded graph."""
from .graph import build_ea_graph, build_mc_graph
from .labeling import (DISTANCE, REACHABILITY, LabelSet, StopLabelSet, build_labels,
                       build_stop_labels, load_labels, reassign_hub_ids, save_labels,
                       trim_event_labels)
from .query import (EVENT_LABELS, STOP_LABELS, EaAnswer, EaQuery, EaVariantFlags, McAnswer,
                    ProfileEntry, ea_event_labels, ea_query, ea_stop_labels, mc_query,
                    profile_event_labels, profile_stop_labels)
from .store import BuildConfig, LabelStore
from .superlabel import LocationAccess, loc_ea_query, loc_profile_query
from .synth import generate_timetable
from .timetable import INFINITY, Timetable, format_timetable, parse_timetable

__version__ = "0.1.0"
