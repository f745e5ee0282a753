"""POPLER: data collection, policy-specific MRP estimation and the learner"""

from .algorithm import PoplerReport, default_sample_sizes, popler
from .collector import ReachedSet, TrajDataset, data_collector
from .estimation import (
    EmpiricalMrp,
    RowEstimate,
    build_empirical_mrp,
    estimate_edge,
    estimate_row,
    exact_policy_mrp,
)

__all__ = [
    "EmpiricalMrp",
    "PoplerReport",
    "ReachedSet",
    "RowEstimate",
    "TrajDataset",
    "build_empirical_mrp",
    "data_collector",
    "default_sample_sizes",
    "estimate_edge",
    "estimate_row",
    "exact_policy_mrp",
    "popler",
]
