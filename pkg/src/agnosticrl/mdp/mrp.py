"""Layered Markov reward processes with a virtual start and end state.

Edge rewards are conditional means: the expected reward collected along an
edge given that the edge is taken. With that convention the backward recursion
V(s) = sum_s' P(s->s') (r(s->s') + V(s')) is exact.
"""

from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ..core.errors import ValidationError
from .model import PROB_TOL, S_TOP, StateId, s_bot

Edge = Tuple[StateId, StateId]


class Mrp:
    """MRP over layered nodes, always including s_top and s_bot.

    Args:
        horizon: H of the underlying MDP; s_bot lives at layer H+1
        nodes: Node set; s_top and s_bot are added when missing
        edges: (source, target) -> (probability, reward)
        exact: Population MRPs must have every non-s_bot row summing to 1
        bound: Largest admissible edge value (1 for exact MRPs, K for
            importance-weighted estimates)
    """

    def __init__(
        self,
        horizon: int,
        nodes: Iterable[StateId],
        edges: Mapping[Edge, Tuple[float, float]],
        exact: bool = True,
        bound: float = 1.0,
    ):
        self.horizon = horizon
        self.bottom = s_bot(horizon)
        node_set = set(nodes) | {S_TOP, self.bottom}
        for node in node_set:
            if not 0 <= node.layer <= horizon + 1:
                raise ValidationError(f"node {node} lies outside layers 0..{horizon + 1}")
        self.nodes: Tuple[StateId, ...] = tuple(sorted(node_set))
        self.exact = exact
        self.bound = bound
        self._index = {node: i for i, node in enumerate(self.nodes)}

        n = len(self.nodes)
        self.P = np.zeros((n, n))
        self.R = np.zeros((n, n))
        for (src, dst), (p, r) in edges.items():
            if src not in self._index or dst not in self._index:
                raise ValidationError(f"edge {src}->{dst} references an unknown node")
            if src == self.bottom:
                continue
            if dst.layer <= src.layer:
                raise ValidationError(f"edge {src}->{dst} does not move to a later layer")
            if not (-PROB_TOL <= p <= bound + PROB_TOL and -PROB_TOL <= r <= bound + PROB_TOL):
                raise ValidationError(f"edge {src}->{dst} has values outside [0, {bound}]")
            self.P[self._index[src], self._index[dst]] = max(p, 0.0)
            self.R[self._index[src], self._index[dst]] = max(r, 0.0)
        b = self._index[self.bottom]
        self.P[b, b] = 1.0
        self.R[b, b] = 0.0

        if exact:
            rows = self.P.sum(axis=1)
            for node, total in zip(self.nodes, rows):
                if node != self.bottom and abs(total - 1.0) > PROB_TOL:
                    raise ValidationError(f"row of {node} sums to {total:.12g}, expected 1")
        self.P.setflags(write=False)
        self.R.setflags(write=False)

    def index(self, node: StateId) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise ValidationError(f"{node} is not a node of the MRP")

    def prob(self, src: StateId, dst: StateId) -> float:
        return float(self.P[self.index(src), self.index(dst)])

    def reward(self, src: StateId, dst: StateId) -> float:
        return float(self.R[self.index(src), self.index(dst)])

    def edges(self) -> Dict[Edge, Tuple[float, float]]:
        """Every edge with positive probability, excluding the s_bot self-loop"""
        out = {}
        b = self._index[self.bottom]
        for i, j in zip(*np.nonzero(self.P)):
            if i == b:
                continue
            out[(self.nodes[i], self.nodes[j])] = (float(self.P[i, j]), float(self.R[i, j]))
        return out

    def successors(self, node: StateId) -> List[StateId]:
        row = self.P[self.index(node)]
        return [self.nodes[j] for j in np.nonzero(row)[0]]


def mrp_value(mrp: Mrp) -> float:
    """Value of s_top after exactly H+1 backward sweeps"""
    V = np.zeros(len(mrp.nodes))
    expected_reward = (mrp.P * mrp.R).sum(axis=1)
    for _ in range(mrp.horizon + 1):
        V = expected_reward + mrp.P @ V
    return float(V[mrp.index(S_TOP)])


def mrp_reach_prob(mrp: Mrp, target: StateId) -> float:
    """Probability that an MRP trajectory from s_top visits target"""
    t = mrp.index(target)
    V = np.zeros(len(mrp.nodes))
    V[t] = 1.0
    for _ in range(mrp.horizon + 1):
        V = mrp.P @ V
        V[t] = 1.0
    return float(V[mrp.index(S_TOP)])


def mrp_occupancy(mrp: Mrp) -> np.ndarray:
    """Probability of visiting each node, in node order"""
    d = np.zeros(len(mrp.nodes))
    d[mrp.index(S_TOP)] = 1.0
    b = mrp.index(mrp.bottom)
    # nodes are sorted by layer, so one forward pass suffices
    for i in range(len(mrp.nodes)):
        if i == b:
            continue
        d += d[i] * mrp.P[i]
    return d


def simulation_gap_bound(exact: Mrp, estimated: Mrp) -> Tuple[float, float]:
    """Value gap between two MRPs and the occupancy-weighted edge-error bound on it.

    Returns:
        (|V - V_hat|, sum_s d(s) * sum_s' (|P - P_hat| + |r - r_hat|)) with d
        taken on the exact MRP

    Raises:
        ValidationError: If the two MRPs have different node sets
    """
    if exact.nodes != estimated.nodes or exact.horizon != estimated.horizon:
        raise ValidationError("MRPs must share the same node set")
    gap = abs(mrp_value(exact) - mrp_value(estimated))
    d = mrp_occupancy(exact)
    per_node = np.abs(exact.P - estimated.P).sum(axis=1) + np.abs(exact.R - estimated.R).sum(axis=1)
    per_node[exact.index(exact.bottom)] = 0.0
    return gap, float(d @ per_node)


def layered_mrp(horizon: int, rows: Dict[StateId, Dict[StateId, Tuple[float, float]]],
                nodes: Optional[Iterable[StateId]] = None, exact: bool = True, bound: float = 1.0) -> Mrp:
    """Convenience constructor from nested source -> {target: (p, r)} rows"""
    edges = {(src, dst): value for src, row in rows.items() for dst, value in row.items()}
    all_nodes = set(nodes or ()) | set(rows) | {dst for row in rows.values() for dst in row}
    return Mrp(horizon, all_nodes, edges, exact=exact, bound=bound)
