"""Multi-armed bandits embedded at the capacity layer of a witness MDP"""

from typing import List, Sequence, Tuple

import numpy as np

from ..capacity.search import CapacityWitness
from ..core.errors import ValidationError
from ..mdp.model import LayeredMdp, StateId
from ..policies.policy import PolicyClass


def embedding_arms(pclass: PolicyClass, witness: CapacityWitness) -> List[Tuple[StateId, int]]:
    """(state, action) pairs the class reaches at the witness layer, sorted"""
    mdp = witness.mdp
    if not mdp.is_deterministic():
        raise ValidationError("bandit embedding needs a deterministic witness")
    if mdp.universe != pclass.universe:
        raise ValidationError("witness and class live on different universes")
    arms = set()
    for policy in pclass:
        state = mdp.initial_state()
        for h in range(1, witness.layer):
            state = mdp.next_state(state, policy.action(state))
        arms.add((state, policy.action(state)))
    return sorted(arms)


def build_bandit_embedding(pclass: PolicyClass, witness: CapacityWitness,
                           arm_rewards: Sequence[float]) -> LayeredMdp:
    """Copy of the witness MDP paying Ber(arm_rewards[i]) on the i-th reachable
    pair at the witness layer and nothing elsewhere.

    Any learner for the class on this MDP identifies the best of the arms, so
    it inherits the bandit sample complexity.

    Raises:
        ValidationError: If the witness is not deterministic or the number of
            arm means differs from the number of reachable pairs
    """
    arms = embedding_arms(pclass, witness)
    means = np.asarray(arm_rewards, dtype=float)
    if means.shape != (len(arms),):
        raise ValidationError(f"{len(arms)} arms are reachable, got {means.size} reward means")
    mdp = witness.mdp
    H, A = mdp.horizon, mdp.action_count
    rewards = [np.zeros((mdp.universe.size(h), A)) for h in range(1, H + 1)]
    flags = [np.zeros((mdp.universe.size(h), A), dtype=bool) for h in range(1, H + 1)]
    for (state, action), mean in zip(arms, means):
        rewards[state.layer - 1][state.index, action] = mean
        flags[state.layer - 1][state.index, action] = True
    transitions = [mdp.transition(h) for h in range(1, H)]
    return LayeredMdp(mdp.layer_sizes, A, transitions, rewards, mdp.init, bernoulli=flags)
