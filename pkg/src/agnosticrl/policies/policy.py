"""Deterministic Markovian policies and finite policy classes"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.model import StateId, Universe


class Policy:
    """A deterministic Markovian policy stored as a dense layer-major action table"""

    __slots__ = ("universe", "table", "_key")

    def __init__(self, universe: Universe, table: Sequence[int]):
        table = np.asarray(table, dtype=np.int64).reshape(-1)
        if table.shape[0] != universe.state_count:
            raise ValidationError(
                f"policy table has {table.shape[0]} entries, universe has {universe.state_count} states"
            )
        if np.any(table < 0) or np.any(table >= universe.action_count):
            raise ValidationError(f"policy actions must lie in [0, {universe.action_count})")
        table.setflags(write=False)
        self.universe = universe
        self.table = table
        self._key = table.astype(np.int16).tobytes()

    @classmethod
    def from_function(cls, universe: Universe, fn: Callable[[StateId], int]) -> "Policy":
        return cls(universe, [fn(s) for s in universe.states()])

    @classmethod
    def constant(cls, universe: Universe, action: int = 0) -> "Policy":
        return cls(universe, np.full(universe.state_count, action))

    def action(self, state: StateId) -> int:
        return int(self.table[self.universe.flat(state)])

    def layer_actions(self, h: int) -> np.ndarray:
        start = int(self.universe.offsets[h - 1])
        return self.table[start : start + self.universe.size(h)]

    def support(self) -> List[StateId]:
        """States on which the policy plays a nonzero action"""
        return [s for s in self.universe.states() if self.action(s) != 0]

    @property
    def key(self) -> bytes:
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Policy) and self.universe == other.universe and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Policy({' '.join(str(int(a)) for a in self.table)})"


def consistent(policy: Policy, partial: Sequence[Tuple[StateId, int]]) -> bool:
    """Check whether a partial trajectory could have been generated by policy.

    Args:
        policy: The policy to test
        partial: (state, action) pairs with strictly increasing layers

    Returns:
        True iff policy plays a_i on every s_i

    Raises:
        ValidationError: If a state lies outside the policy's universe or the
            layers are not strictly increasing
    """
    previous = 0
    for state, action in partial:
        if state.layer <= previous:
            raise ValidationError("partial trajectory layers must be strictly increasing")
        previous = state.layer
        if policy.action(state) != action:
            return False
    return True


@dataclass(frozen=True)
class PolicyClass:
    """A finite, duplicate-free, nonempty collection of policies on one universe"""

    universe: Universe
    members: Tuple[Policy, ...]
    tag: str = "explicit"
    params: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.members:
            raise ValidationError("a policy class must be nonempty")
        keys = set()
        for policy in self.members:
            if policy.universe != self.universe:
                raise ValidationError("every member must share the class universe")
            if policy.key in keys:
                raise ValidationError("policy class members must be distinct")
            keys.add(policy.key)
        tables = np.stack([p.table for p in self.members])
        tables.setflags(write=False)
        object.__setattr__(self, "_tables", tables)

    @classmethod
    def from_members(
        cls,
        universe: Universe,
        members: Sequence[Policy],
        tag: str = "explicit",
        params: Optional[Dict[str, int]] = None,
    ) -> "PolicyClass":
        """Build a class, dropping repeated members while keeping first-seen order"""
        seen = set()
        unique = []
        for policy in members:
            if policy.key not in seen:
                seen.add(policy.key)
                unique.append(policy)
        return cls(universe, tuple(unique), tag, dict(params or {}))

    @classmethod
    def from_tables(cls, universe: Universe, tables: np.ndarray, tag: str = "explicit",
                    params: Optional[Dict[str, int]] = None) -> "PolicyClass":
        return cls.from_members(universe, [Policy(universe, row) for row in tables], tag, params)

    @property
    def tables(self) -> np.ndarray:
        """Action tables of every member, shape (|class|, state_count)"""
        return self._tables

    @property
    def horizon(self) -> int:
        return self.universe.horizon

    @property
    def action_count(self) -> int:
        return self.universe.action_count

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Policy]:
        return iter(self.members)

    def __getitem__(self, index: int) -> Policy:
        return self.members[index]

    def index_of(self, policy: Policy) -> int:
        for i, member in enumerate(self.members):
            if member == policy:
                return i
        raise ValidationError("policy is not a member of the class")

    def describe(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.tag}({params})" if params else self.tag
