"""Classical trajectory-level importance sampling under uniform exploration"""

import logging
import math
from typing import Tuple

import numpy as np

from ..core.errors import GuardExceeded, ValidationError
from ..mdp.dynamics import sample_uniform_actions
from ..mdp.model import LayeredMdp, TrajectoryBatch
from ..policies.policy import PolicyClass

logger = logging.getLogger(__name__)

MAX_LOG2_WEIGHT = 40


def importance_weights(pclass: PolicyClass, batch: TrajectoryBatch) -> np.ndarray:
    """A^H 1[pi consistent with tau] for every member and trajectory, shape (|class|, n)"""
    offsets = pclass.universe.offsets
    flat = offsets[None, :] + batch.states
    weight = float(pclass.action_count) ** pclass.horizon
    out = np.zeros((len(pclass), len(batch)))
    for m, table in enumerate(pclass.tables):
        out[m] = np.all(table[flat] == batch.actions, axis=1) * weight
    return out


def importance_sampling(
    mdp: LayeredMdp, pclass: PolicyClass, n: int, rng: np.random.Generator
) -> Tuple[int, np.ndarray]:
    """Estimate every member's value from n uniformly random episodes.

    Returns:
        (index of the best estimate, estimates for all members); ties go to
        the lowest index

    Raises:
        GuardExceeded: If A^H is too large to represent the weights exactly
    """
    if pclass.universe != mdp.universe:
        raise ValidationError("policy class and MDP live on different universes")
    if n < 1:
        raise ValidationError("importance sampling needs at least one episode")
    if mdp.horizon * math.log2(mdp.action_count) > MAX_LOG2_WEIGHT:
        raise GuardExceeded(f"A^H = {mdp.action_count}^{mdp.horizon} exceeds 2^{MAX_LOG2_WEIGHT}")
    batch = sample_uniform_actions(mdp, n, rng)
    returns = batch.rewards.sum(axis=1)
    values = importance_weights(pclass, batch) @ returns / n
    best = int(np.argmax(values))
    logger.debug("importance sampling over %d episodes picked member %d", n, best)
    return best, values
