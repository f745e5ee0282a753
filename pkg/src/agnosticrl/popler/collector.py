"""Reached-state bookkeeping and the exploration data collector"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.dynamics import sample_batch
from ..mdp.model import S_TOP, LayeredMdp, StateId, TrajectoryBatch
from ..policies.policy import Policy, PolicyClass


@dataclass
class ReachedSet:
    """Tuples (state, reacher) discovered so far; s_top is always first with no reacher"""

    entries: List[Tuple[StateId, Optional[Policy], Optional[int]]] = field(
        default_factory=lambda: [(S_TOP, None, None)]
    )

    @property
    def states(self) -> frozenset:
        return frozenset(s for s, _, _ in self.entries)

    def add(self, state: StateId, reacher: Policy, member: Optional[int] = None) -> None:
        if state in self.states:
            raise ValidationError(f"{state} is already in the reached set")
        self.entries.append((state, reacher, member))

    def __len__(self) -> int:
        return len(self.entries)

    def to_list(self) -> List[dict]:
        return [{"state": str(s), "reacher": m} for s, _, m in self.entries]


@dataclass
class TrajDataset:
    """Trajectories that passed through the anchor state at its layer"""

    anchor: StateId
    batch: TrajectoryBatch
    requested: int
    _cache: Dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    @property
    def accepted(self) -> int:
        return len(self.batch)

    def __len__(self) -> int:
        return len(self.batch)

    def mismatch_prefix(self, offsets: np.ndarray, table: np.ndarray) -> np.ndarray:
        """Cumulative count of steps where the trajectory's action differs from table.

        Column j counts mismatches among the first j layers, so the segment of
        0-based layers [a, b) is consistent iff prefix[:, b] == prefix[:, a].
        """
        planned = table[offsets[None, :] + self.batch.states]
        mismatch = (planned != self.batch.actions).astype(np.int32)
        prefix = np.zeros((len(self), mismatch.shape[1] + 1), dtype=np.int32)
        np.cumsum(mismatch, axis=1, out=prefix[:, 1:])
        return prefix

    def core_prefix(self, offsets: np.ndarray, core: PolicyClass) -> np.ndarray:
        """mismatch_prefix for every core policy, shape (K, n, H+1), cached per core"""
        key = id(core)
        if key not in self._cache:
            self._cache[key] = np.stack([self.mismatch_prefix(offsets, t) for t in core.tables])
        return self._cache[key]


def data_collector(
    mdp: LayeredMdp,
    s: StateId,
    reacher: Optional[Policy],
    core: PolicyClass,
    n: int,
    rng: np.random.Generator,
) -> TrajDataset:
    """Collect trajectories through s by running the reacher up to s and then
    a uniformly drawn core policy.

    From s_top every attempt is kept and the core policy acts from layer 1.
    Otherwise the reacher plays layers 1..h-1, and attempts that are not at s
    on layer h are discarded.
    """
    if (reacher is None) != (s == S_TOP):
        raise ValidationError("a reacher policy is required exactly when the anchor is not s_top")
    if core.universe != mdp.universe:
        raise ValidationError("core policies and MDP live on different universes")
    if n < 0:
        raise ValidationError("number of attempts must be non-negative")
    choice = rng.integers(0, len(core), size=n)
    if s == S_TOP:
        return TrajDataset(s, sample_batch(mdp, core.tables, choice, rng), n)

    before = mdp.universe.layer_of_flat() < s.layer
    tables = np.where(before[None, :], reacher.table[None, :], core.tables)
    batch = sample_batch(mdp, tables, choice, rng)
    return TrajDataset(s, batch.select(batch.states[:, s.layer - 1] == s.index), n)
