"""Exact spanning capacity by memoised search over deterministic MDPs on the class universe.

Members that reach the same state of layer t form a block, and distinct blocks
sit on distinct states. Placing every block of layer t on a state splits it by
the actions its members play there; the resulting (state, action) groups are
what layer t counts. Routing each group to a successor state of layer t+1
(several groups may share one) gives the blocks of layer t+1, so every path of
the search is a Markov deterministic MDP.

From layer t on, members that play identically on layers t..H are
interchangeable, so blocks are sets of such suffix types and configurations
are memoised on (t, sorted blocks). ``expand`` returns, for every layer t+k,
the largest number of groups reachable there. Each layer is maximised
separately, so the vector is a pointwise maximum.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.model import LayeredMdp, Universe
from ..policies.policy import PolicyClass

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10**7

Block = Tuple[int, ...]
Config = Tuple[Block, ...]


@dataclass(frozen=True)
class CapacityWitness:
    """Deterministic MDP on the class universe attaining the capacity at ``layer``"""

    mdp: LayeredMdp
    layer: int


@dataclass(frozen=True)
class CapacityResult:
    """Spanning capacity with its per-layer profile and a witness"""

    value: int
    per_layer: Tuple[int, ...]
    nodes_expanded: int
    exact: bool
    witness: Optional[CapacityWitness] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "per_layer": list(self.per_layer),
            "nodes_expanded": self.nodes_expanded,
            "exact": self.exact,
        }


def _partitions_into(n: int, k: int) -> Iterator[List[List[int]]]:
    """Set partitions of range(n) into exactly k blocks"""
    if k == 0:
        if n == 0:
            yield []
        return
    if n < k:
        return
    for part in _partitions_into(n - 1, k - 1):
        yield part + [[n - 1]]
    for part in _partitions_into(n - 1, k):
        for i in range(k):
            yield [block + [n - 1] if j == i else block for j, block in enumerate(part)]


def _partitions(n: int, most: int) -> Iterator[List[List[int]]]:
    """Set partitions of range(n) into at most ``most`` blocks, finest first"""
    for k in range(min(n, most), 0, -1):
        yield from _partitions_into(n, k)


def _distinct_states(choices: Sequence[Sequence[int]]) -> Optional[List[int]]:
    """One state per block from its allowed list, all distinct, or None"""
    owner: Dict[int, int] = {}

    def claim(i: int, seen: Set[int]) -> bool:
        for s in choices[i]:
            if s in seen:
                continue
            seen.add(s)
            if s not in owner or claim(owner[s], seen):
                owner[s] = i
                return True
        return False

    for i in range(len(choices)):
        if not claim(i, set()):
            return None
    states = [0] * len(choices)
    for s, i in owner.items():
        states[i] = s
    return states


class _Search:
    def __init__(self, pclass: PolicyClass, node_budget: int):
        universe = pclass.universe
        self.H = universe.horizon
        self.A = universe.action_count
        self.sizes = universe.layer_sizes
        self.budget = node_budget
        self.memo: Dict[Tuple[int, Config], Tuple[int, ...]] = {}
        self.bounds: Dict[Tuple[int, Block], np.ndarray] = {}
        self.expanded = 0
        self.truncated = False

        tables = pclass.tables
        offsets = universe.offsets
        # suffix[t]: distinct member tables restricted to layers t..H
        self.suffix: Dict[int, np.ndarray] = {}
        type_of: Dict[int, np.ndarray] = {}
        for t in range(1, self.H + 1):
            rows, inverse = np.unique(tables[:, int(offsets[t - 1]) :], axis=0, return_inverse=True)
            self.suffix[t] = rows
            type_of[t] = inverse.reshape(-1)
        self.root: Block = tuple(range(len(self.suffix[1])))
        self.next_type: Dict[int, np.ndarray] = {}
        for t in range(1, self.H):
            mapping = np.zeros(len(self.suffix[t]), dtype=np.int64)
            mapping[type_of[t]] = type_of[t + 1]
            self.next_type[t] = mapping
        self.layer_cap = np.array([n * self.A for n in self.sizes], dtype=np.int64)

    def actions(self, t: int, types: Sequence[int], state: int) -> np.ndarray:
        return self.suffix[t][list(types), state]

    def block_bound(self, t: int, block: Block) -> np.ndarray:
        """Distinct trajectories the block can still produce at each layer t..H"""
        key = (t, block)
        if key not in self.bounds:
            rows = self.suffix[t][list(block)]
            out, width = [], 0
            for k in range(t, self.H + 1):
                width += self.sizes[k - 1]
                distinct = len(np.unique(rows[:, :width], axis=0))
                out.append(min(self.A ** (k - t + 1), distinct))
            self.bounds[key] = np.array(out, dtype=np.int64)
        return self.bounds[key]

    def bound(self, config: Config, t: int) -> np.ndarray:
        total = sum(self.block_bound(t, block) for block in config)
        return np.minimum(self.layer_cap[t - 1 :], total)

    def splits(self, t: int, block: Block) -> List[Tuple[Tuple[Block, ...], List[int]]]:
        """Distinct ways a block can split on a state of layer t, finest first"""
        found: Dict[Tuple[Block, ...], List[int]] = {}
        columns = self.suffix[t][list(block), : self.sizes[t - 1]]
        members = np.array(block)
        for state in range(self.sizes[t - 1]):
            column = columns[:, state]
            groups = tuple(tuple(int(x) for x in members[column == a]) for a in np.unique(column))
            found.setdefault(groups, []).append(state)
        return sorted(found.items(), key=lambda item: (-len(item[0]), item[1][0]))

    def placements(self, blocks: Sequence[Block], t: int) -> Iterator[Tuple[List[int], List[Block], List[int]]]:
        """Distinct outcomes of putting the blocks on distinct states of layer t.

        Yields the chosen state per block, the resulting groups and the block
        position each group came from; outcomes with the same groups are
        reported once.
        """
        options = [self.splits(t, block) for block in blocks]
        seen: Set[Tuple[Block, ...]] = set()
        for combo in itertools.product(*options):
            groups = [g for split, _ in combo for g in split]
            key = tuple(sorted(groups))
            if key in seen:
                continue
            states = _distinct_states([allowed for _, allowed in combo])
            if states is None:
                continue
            seen.add(key)
            owners = [position for position, (split, _) in enumerate(combo) for _ in split]
            yield states, groups, owners

    def routings(self, groups: Sequence[Block], t: int) -> Iterator[Tuple[List[List[int]], List[Block]]]:
        """Ways to send the groups of layer t to at most S_{t+1} successor states"""
        mapping = self.next_type[t]
        for parts in _partitions(len(groups), self.sizes[t]):
            children = [tuple(sorted({int(mapping[x]) for g in part for x in groups[g]})) for part in parts]
            yield parts, children

    def over_budget(self) -> bool:
        if not self.truncated and len(self.memo) >= self.budget:
            logger.warning("capacity search hit its budget of %d nodes; result is a lower bound", self.budget)
            self.truncated = True
        return self.truncated

    def expand(self, config: Config, t: int) -> np.ndarray:
        key = (t, config)
        if key in self.memo:
            return np.array(self.memo[key], dtype=np.int64)
        self.expanded += 1
        limit = 1 if self.over_budget() else None
        bound = self.bound(config, t)
        best = np.zeros(self.H - t + 1, dtype=np.int64)
        seen: Set[Tuple[int, Config]] = set()
        for _, groups, _ in itertools.islice(self.placements(config, t), limit):
            count = len(groups)
            if t == self.H:
                best = np.maximum(best, [count])
            else:
                for _, children in itertools.islice(self.routings(groups, t), limit):
                    child = tuple(sorted(children))
                    if (count, child) in seen:
                        continue
                    seen.add((count, child))
                    head = np.concatenate(([count], self.bound(child, t + 1)))
                    if np.all(head <= best):
                        continue
                    best = np.maximum(best, np.concatenate(([count], self.expand(child, t + 1))))
                    if np.array_equal(best, bound):
                        break
            if np.array_equal(best, bound):
                break
        if not self.over_budget():
            self.memo[key] = tuple(int(x) for x in best)
        return best


def _build_witness(search: _Search, universe: Universe, target: int, goal: int) -> CapacityWitness:
    """Replay the search, keeping the first placement and routing that still reach ``goal``"""
    H, A = search.H, search.A
    search.budget = float("inf")
    kernels = [np.zeros((search.sizes[t - 1], A, search.sizes[t])) for t in range(1, H)]
    for kernel in kernels:
        kernel[:, :, 0] = 1.0
    blocks: List[Block] = [search.root]
    # (layer, state, action, child position) edges waiting for the child's state
    pending: List[Tuple[int, int, int, int]] = []
    init = np.zeros(search.sizes[0])
    for t in range(1, target + 1):
        chosen = None
        for states, groups, owners in search.placements(blocks, t):
            if t == target:
                if len(groups) == goal:
                    chosen = (states, groups, owners, [], [])
                    break
                continue
            for parts, children in search.routings(groups, t):
                if search.expand(tuple(sorted(children)), t + 1)[target - t - 1] == goal:
                    chosen = (states, groups, owners, parts, children)
                    break
            if chosen is not None:
                break
        if chosen is None:
            raise ValidationError(f"could not rebuild a witness for layer {target}")
        states, groups, owners, parts, children = chosen
        if t == 1:
            init[states[0]] = 1.0
        for layer, state, action, child in pending:
            kernels[layer - 1][state, action, :] = 0.0
            kernels[layer - 1][state, action, states[child]] = 1.0
        pending = []
        for child, part in enumerate(parts):
            for g in part:
                state = states[owners[g]]
                pending.append((t, state, int(search.actions(t, groups[g][:1], state)[0]), child))
        blocks = children

    rewards = [np.zeros((n, A)) for n in search.sizes]
    mdp = LayeredMdp(universe.layer_sizes, A, kernels, rewards, init)
    return CapacityWitness(mdp, target)


def spanning_capacity(pclass: PolicyClass, node_budget: int = DEFAULT_NODE_BUDGET,
                      witness: bool = True) -> CapacityResult:
    """Largest number of (state, action) pairs reachable by the class at one layer
    of some deterministic MDP on the class universe.

    Args:
        pclass: Nonempty policy class
        node_budget: Memo entries allowed before the search stops branching
            over placements and routings; past it the result is a certified
            lower bound
        witness: Reconstruct a deterministic MDP attaining the value

    Returns:
        CapacityResult with exact=False when the budget was exhausted; a
        truncated search carries no witness
    """
    if node_budget < 1:
        raise ValidationError("node budget must be positive")
    search = _Search(pclass, node_budget)
    per_layer = search.expand((search.root,), 1)
    value = int(per_layer.max())
    target = int(np.argmax(per_layer)) + 1
    exact = not search.truncated
    expanded = search.expanded
    logger.debug("capacity of %s: %s over %d expanded nodes", pclass.describe(), per_layer.tolist(), search.expanded)
    return CapacityResult(
        value=value,
        per_layer=tuple(int(x) for x in per_layer),
        nodes_expanded=expanded,
        exact=exact,
        witness=_build_witness(search, pclass.universe, target, value) if witness and exact else None,
    )
