from .bandwidth import BandwidthSchedule, bandwidth_from_states, bandwidth_silverman
from .oracle import brute_force_count
from .store import (
    LabeledStateStore,
    StorePair,
    estimate_count,
    estimate_count_per_pair,
    load_snapshot,
    record_states,
    save_snapshot,
)

__all__ = [
    "BandwidthSchedule",
    "LabeledStateStore",
    "StorePair",
    "bandwidth_from_states",
    "bandwidth_silverman",
    "brute_force_count",
    "estimate_count",
    "estimate_count_per_pair",
    "load_snapshot",
    "record_states",
    "save_snapshot",
]
