"""Layered MDP and MRP models with exact dynamic programming"""

from .dynamics import (
    OccupancyTable,
    exact_policy_value,
    occupancy,
    sample_batch,
    sample_trajectories,
    sample_trajectory,
    sample_uniform_actions,
    state_values,
)
from .formats import dumps_mdp, dumps_mrp, loads_mdp, loads_mrp, read_mdp, read_mrp, write_mdp, write_mrp
from .generators import binary_tree_mdp, chain_mdp, random_mdp
from .model import S_TOP, LayeredMdp, StateId, Trajectory, TrajectoryBatch, Universe, s_bot
from .mrp import Mrp, layered_mrp, mrp_occupancy, mrp_reach_prob, mrp_value, simulation_gap_bound

__all__ = [
    "LayeredMdp",
    "Mrp",
    "OccupancyTable",
    "S_TOP",
    "StateId",
    "Trajectory",
    "TrajectoryBatch",
    "Universe",
    "binary_tree_mdp",
    "chain_mdp",
    "dumps_mdp",
    "dumps_mrp",
    "exact_policy_value",
    "layered_mrp",
    "loads_mdp",
    "loads_mrp",
    "mrp_occupancy",
    "mrp_reach_prob",
    "mrp_value",
    "occupancy",
    "random_mdp",
    "read_mdp",
    "read_mrp",
    "s_bot",
    "sample_batch",
    "sample_trajectories",
    "sample_trajectory",
    "sample_uniform_actions",
    "simulation_gap_bound",
    "state_values",
    "write_mdp",
    "write_mrp",
]
