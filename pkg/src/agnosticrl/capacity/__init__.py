"""Spanning capacity, cumulative reachability and coverability"""

from .coverability import coverability, coverability_profile, cumulative_reachability, rollout
from .search import DEFAULT_NODE_BUDGET, CapacityResult, CapacityWitness, spanning_capacity

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "CapacityResult",
    "CapacityWitness",
    "coverability",
    "coverability_profile",
    "cumulative_reachability",
    "rollout",
    "spanning_capacity",
]
