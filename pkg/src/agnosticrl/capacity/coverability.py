"""Coverability of a class on a fixed MDP and reachability on deterministic MDPs"""

from typing import List

import numpy as np

from ..core.errors import ValidationError
from ..mdp.dynamics import occupancy
from ..mdp.model import LayeredMdp, StateId
from ..policies.policy import PolicyClass


def _check_universe(pclass: PolicyClass, mdp: LayeredMdp) -> None:
    if pclass.universe != mdp.universe:
        raise ValidationError("policy class and MDP live on different universes")


def rollout(mdp: LayeredMdp, table: np.ndarray) -> List[StateId]:
    """States visited by a deterministic policy table on a deterministic MDP"""
    state = mdp.initial_state()
    path = [state]
    for h in range(1, mdp.horizon):
        action = int(table[mdp.universe.flat(state)])
        state = mdp.next_state(state, action)
        path.append(state)
    return path


def cumulative_reachability(pclass: PolicyClass, mdp: LayeredMdp, h: int) -> int:
    """Number of distinct (state, action) pairs at layer h on some member's rollout

    Raises:
        ValidationError: If mdp is not deterministic or h is out of range
    """
    _check_universe(pclass, mdp)
    if not mdp.is_deterministic():
        raise ValidationError("cumulative reachability needs a deterministic MDP")
    if not 1 <= h <= mdp.horizon:
        raise ValidationError(f"layer {h} outside 1..{mdp.horizon}")
    pairs = set()
    for policy in pclass:
        state = rollout(mdp, policy.table)[h - 1]
        pairs.add((state, policy.action(state)))
    return len(pairs)


def coverability_profile(pclass: PolicyClass, mdp: LayeredMdp) -> np.ndarray:
    """sum_{s,a} max_pi d^pi_h(s, a) for every layer h"""
    _check_universe(pclass, mdp)
    best = None
    for policy in pclass:
        pairs = occupancy(mdp, policy).pairs
        best = pairs if best is None else [np.maximum(b, p) for b, p in zip(best, pairs)]
    return np.array([b.sum() for b in best])


def coverability(pclass: PolicyClass, mdp: LayeredMdp) -> float:
    """Coverability coefficient: the worst layer of coverability_profile"""
    return float(coverability_profile(pclass, mdp).max())
