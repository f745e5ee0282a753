"""Exact evaluation, occupancy measures and trajectory sampling on layered MDPs"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from ..core.errors import ValidationError
from .model import LayeredMdp, StateId, Trajectory, TrajectoryBatch

if TYPE_CHECKING:
    from ..policies.policy import Policy


def _check_policy(mdp: LayeredMdp, policy: "Policy") -> None:
    if policy.universe != mdp.universe:
        raise ValidationError("policy universe does not match the MDP")


def _layer_actions(mdp: LayeredMdp, table: np.ndarray, h: int) -> np.ndarray:
    start = int(mdp.universe.offsets[h - 1])
    return table[start : start + mdp.universe.size(h)]


def _rollout(mdp: LayeredMdp, n: int, choose, rng: np.random.Generator) -> TrajectoryBatch:
    """Roll out n episodes; choose(h, states) gives the layer-h actions.

    The random stream is consumed in a fixed order (initial states, then per
    layer the reward draws followed by the transition draws) so results depend
    only on the generator state.
    """
    H = mdp.horizon
    states = np.zeros((n, H), dtype=np.int64)
    actions = np.zeros((n, H), dtype=np.int64)
    rewards = np.zeros((n, H), dtype=float)
    if n == 0:
        return TrajectoryBatch(states, actions, rewards)

    current = np.searchsorted(mdp.init_cdf, rng.random(n), side="right")
    current = np.minimum(current, mdp.layer_sizes[0] - 1)
    for h in range(1, H + 1):
        states[:, h - 1] = current
        act = choose(h, current)
        actions[:, h - 1] = act
        means = mdp.reward_mean(h)[current, act]
        coins = rng.random(n)
        rewards[:, h - 1] = np.where(mdp.is_bernoulli(h)[current, act], (coins < means).astype(float), means)
        if h < H:
            cdf = mdp.transition_cdf(h)[current, act]
            u = rng.random(n)
            current = (u[:, None] >= cdf).sum(axis=1)
            current = np.minimum(current, mdp.layer_sizes[h] - 1)
    return TrajectoryBatch(states, actions, rewards)


def sample_batch(
    mdp: LayeredMdp,
    tables: np.ndarray,
    assignment: np.ndarray,
    rng: np.random.Generator,
) -> TrajectoryBatch:
    """Roll out one episode per entry of assignment, episode i following
    the action table ``tables[assignment[i]]``"""
    tables = np.atleast_2d(tables)
    assignment = np.asarray(assignment, dtype=np.int64)
    offsets = mdp.universe.offsets

    def choose(h: int, current: np.ndarray) -> np.ndarray:
        return tables[assignment, offsets[h - 1] + current]

    return _rollout(mdp, assignment.shape[0], choose, rng)


def sample_uniform_actions(mdp: LayeredMdp, n: int, rng: np.random.Generator) -> TrajectoryBatch:
    """Roll out n episodes choosing every action uniformly at random"""
    actions = rng.integers(0, mdp.action_count, size=(n, mdp.horizon))

    def choose(h: int, current: np.ndarray) -> np.ndarray:
        return actions[:, h - 1]

    return _rollout(mdp, n, choose, rng)


def sample_trajectory(mdp: LayeredMdp, policy: "Policy", rng: np.random.Generator) -> Trajectory:
    """Sample one episode of mdp under policy"""
    _check_policy(mdp, policy)
    batch = sample_batch(mdp, policy.table[None, :], np.zeros(1, dtype=np.int64), rng)
    return batch.trajectory(0)


def sample_trajectories(mdp: LayeredMdp, policy: "Policy", n: int, rng: np.random.Generator) -> TrajectoryBatch:
    _check_policy(mdp, policy)
    return sample_batch(mdp, policy.table[None, :], np.zeros(n, dtype=np.int64), rng)


def state_values(mdp: LayeredMdp, policy: "Policy") -> List[np.ndarray]:
    """Per-layer value vectors V^pi_h computed by backward dynamic programming"""
    _check_policy(mdp, policy)
    H = mdp.horizon
    values: List[Optional[np.ndarray]] = [None] * H
    nxt = None
    for h in range(H, 0, -1):
        acts = _layer_actions(mdp, policy.table, h)
        idx = np.arange(mdp.universe.size(h))
        v = mdp.reward_mean(h)[idx, acts].copy()
        if nxt is not None:
            v += mdp.transition(h)[idx, acts] @ nxt
        values[h - 1] = v
        nxt = v
    return values


def exact_policy_value(mdp: LayeredMdp, policy: "Policy") -> float:
    """Expected return of policy from the initial distribution"""
    return float(mdp.init @ state_values(mdp, policy)[0])


@dataclass(frozen=True)
class OccupancyTable:
    """State and state-action occupancies d^pi_h for every layer"""

    states: List[np.ndarray]
    pairs: List[np.ndarray]

    def state(self, s: StateId) -> float:
        return float(self.states[s.layer - 1][s.index])

    def pair(self, s: StateId, a: int) -> float:
        return float(self.pairs[s.layer - 1][s.index, a])

    def layer_sums(self) -> np.ndarray:
        return np.array([p.sum() for p in self.pairs])


def occupancy(mdp: LayeredMdp, policy: "Policy") -> OccupancyTable:
    """Forward dynamic programming for d^pi_h(s) and d^pi_h(s, a)"""
    _check_policy(mdp, policy)
    states, pairs = [], []
    d = mdp.init.copy()
    for h in range(1, mdp.horizon + 1):
        acts = _layer_actions(mdp, policy.table, h)
        idx = np.arange(mdp.universe.size(h))
        sa = np.zeros((mdp.universe.size(h), mdp.action_count))
        sa[idx, acts] = d
        states.append(d)
        pairs.append(sa)
        if h < mdp.horizon:
            d = d @ mdp.transition(h)[idx, acts]
    return OccupancyTable(states, pairs)
