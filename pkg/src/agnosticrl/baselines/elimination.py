"""Policy elimination on MDPs with deterministic transitions"""

from typing import Dict, Optional, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.dynamics import sample_trajectory
from ..mdp.model import LayeredMdp, StateId
from ..policies.policy import Policy, PolicyClass


def _replay(known: Dict[Tuple[StateId, int], Tuple[StateId, float]], start: StateId, policy: Policy,
            horizon: int) -> Optional[float]:
    """Return of policy from the revealed steps alone, None if it leaves them"""
    state, total = start, 0.0
    for _ in range(horizon):
        step = known.get((state, policy.action(state)))
        if step is None:
            return None
        state, reward = step
        total += reward
    return total


def policy_elimination(
    mdp: LayeredMdp, pclass: PolicyClass, rng: np.random.Generator
) -> Tuple[int, np.ndarray, int]:
    """Run the lowest-index unresolved member and resolve every member whose
    whole path is made of (state, action) steps revealed so far.

    Each member's value is the return replayed from the revealed steps, which
    is exact when rewards are point masses. Every episode reveals at least one
    new reachable pair, so at most H times capacity episodes run.

    Returns:
        (best member index, per-member values, episodes used)
    """
    if pclass.universe != mdp.universe:
        raise ValidationError("policy class and MDP live on different universes")
    if not mdp.is_deterministic():
        raise ValidationError("policy elimination needs deterministic transitions")
    H = mdp.horizon
    start = mdp.initial_state()
    known: Dict[Tuple[StateId, int], Tuple[StateId, float]] = {}
    values = np.zeros(len(pclass))
    unresolved = np.ones(len(pclass), dtype=bool)
    episodes = 0
    while unresolved.any():
        m = int(np.argmax(unresolved))
        tau = sample_trajectory(mdp, pclass[m], rng)
        episodes += 1
        steps = tau.steps()
        for h, (state, action, reward) in enumerate(steps, start=1):
            after = steps[h][0] if h < H else StateId(H + 1, 0)
            known[(state, action)] = (after, reward)
        for j in np.flatnonzero(unresolved):
            value = _replay(known, start, pclass[j], H)
            if value is not None:
                values[j] = value
                unresolved[j] = False
    return int(np.argmax(values)), values, episodes
