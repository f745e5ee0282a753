"""Trajectory trees under a generative model"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.model import LayeredMdp, StateId, s_bot
from ..policies.policy import PolicyClass

logger = logging.getLogger(__name__)


class GenerativeOracle:
    """Sample access to (s', r) ~ P(.|s, a), R(s, a) for any chosen (s, a)"""

    def __init__(self, mdp: LayeredMdp):
        self.mdp = mdp
        self.queries = 0

    def sample_initial(self, rng: np.random.Generator) -> StateId:
        return StateId(1, int(rng.choice(self.mdp.layer_sizes[0], p=self.mdp.init)))

    def query(self, state: StateId, action: int, rng: np.random.Generator) -> Tuple[StateId, float]:
        mdp = self.mdp
        if not mdp.universe.contains(state) or not 0 <= action < mdp.action_count:
            raise ValidationError(f"cannot query ({state}, {action})")
        self.queries += 1
        h = state.layer
        mean = mdp.reward_mean(h)[state.index, action]
        coin = rng.random()
        reward = float(coin < mean) if mdp.is_bernoulli(h)[state.index, action] else float(mean)
        if h == mdp.horizon:
            return s_bot(mdp.horizon), reward
        row = mdp.transition(h)[state.index, action]
        return StateId(h + 1, int(rng.choice(len(row), p=row))), reward


@dataclass
class TrajectoryTree:
    """One sampled transition and reward for each (s, a) the class reaches"""

    root: StateId
    edges: Dict[Tuple[StateId, int], Tuple[StateId, float]] = field(default_factory=dict)

    def topology(self) -> FrozenSet[Tuple[StateId, int, StateId]]:
        return frozenset((s, a, nxt) for (s, a), (nxt, _) in self.edges.items())

    def evaluate(self, table: np.ndarray, universe) -> float:
        state, total = self.root, 0.0
        for _ in range(universe.horizon):
            action = int(table[universe.flat(state)])
            state, reward = self.edges[(state, action)]
            total += reward
        return total


def build_tree(oracle: GenerativeOracle, pclass: PolicyClass, rng: np.random.Generator) -> TrajectoryTree:
    """Grow a tree layer by layer, querying unsampled pairs in member-index order"""
    universe = pclass.universe
    tree = TrajectoryTree(oracle.sample_initial(rng))
    positions = [tree.root] * len(pclass)
    for _ in range(universe.horizon):
        for m, table in enumerate(pclass.tables):
            state = positions[m]
            action = int(table[universe.flat(state)])
            if (state, action) not in tree.edges:
                tree.edges[(state, action)] = oracle.query(state, action, rng)
            positions[m] = tree.edges[(state, action)][0]
    return tree


@dataclass
class TreeReport:
    best_index: int
    values: np.ndarray
    query_count: int
    per_tree_queries: List[int]
    trees: List[TrajectoryTree] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "best_index": self.best_index,
            "values": [float(v) for v in self.values],
            "query_count": self.query_count,
            "max_tree_queries": max(self.per_tree_queries) if self.per_tree_queries else 0,
        }


def trajectory_tree(
    oracle: GenerativeOracle,
    pclass: PolicyClass,
    n: int,
    rng: np.random.Generator,
    keep_trees: bool = False,
) -> Tuple[int, TreeReport]:
    """Evaluate every member on n sampled trajectory trees.

    Returns:
        (index of the best mean return, TreeReport with the oracle query count)
    """
    if pclass.universe != oracle.mdp.universe:
        raise ValidationError("policy class and MDP live on different universes")
    if n < 1:
        raise ValidationError("at least one tree is required")
    totals = np.zeros(len(pclass))
    per_tree, trees = [], []
    start = oracle.queries
    for _ in range(n):
        before = oracle.queries
        tree = build_tree(oracle, pclass, rng)
        per_tree.append(oracle.queries - before)
        totals += [tree.evaluate(table, pclass.universe) for table in pclass.tables]
        if keep_trees:
            trees.append(tree)
    values = totals / n
    best = int(np.argmax(values))
    report = TreeReport(best, values, oracle.queries - start, per_tree, trees)
    logger.debug("trajectory trees: %d queries over %d trees", report.query_count, n)
    return best, report
