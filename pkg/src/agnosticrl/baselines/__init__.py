"""Baseline learners: importance sampling, trajectory trees, policy elimination"""

from .elimination import policy_elimination
from .importance import importance_sampling, importance_weights
from .trajtree import GenerativeOracle, TrajectoryTree, TreeReport, build_tree, trajectory_tree

__all__ = [
    "GenerativeOracle",
    "TrajectoryTree",
    "TreeReport",
    "build_tree",
    "importance_sampling",
    "importance_weights",
    "policy_elimination",
    "trajectory_tree",
]
