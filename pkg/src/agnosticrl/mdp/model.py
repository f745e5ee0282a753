"""Layered tabular MDP model.

States are addressed by ``StateId(layer, index)``. Ordinary trajectories live
in layers 1..H; layer 0 holds the virtual start state and layer H+1 the virtual
end state used by Markov reward processes.
"""

from dataclasses import dataclass
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import ValidationError

PROB_TOL = 1e-9


class StateId(NamedTuple):
    """A state addressed by its layer and its index within that layer"""

    layer: int
    index: int

    def __str__(self) -> str:
        return f"{self.layer}:{self.index}"

    @classmethod
    def parse(cls, token: str) -> "StateId":
        layer, _, index = token.partition(":")
        return cls(int(layer), int(index))


S_TOP = StateId(0, 0)


def s_bot(horizon: int) -> StateId:
    """The virtual end state for a given horizon"""
    return StateId(horizon + 1, 0)


@dataclass(frozen=True)
class Universe:
    """The state/action universe shared by an MDP and the policies acting on it"""

    layer_sizes: Tuple[int, ...]
    action_count: int

    def __post_init__(self):
        if not self.layer_sizes:
            raise ValidationError("a universe needs at least one layer")
        if any(n < 1 for n in self.layer_sizes):
            raise ValidationError("every layer needs at least one state")
        if self.action_count < 1:
            raise ValidationError("action count must be positive")
        object.__setattr__(self, "layer_sizes", tuple(int(n) for n in self.layer_sizes))

    @classmethod
    def uniform(cls, states_per_layer: int, horizon: int, action_count: int) -> "Universe":
        return cls(tuple([states_per_layer] * horizon), action_count)

    @property
    def horizon(self) -> int:
        return len(self.layer_sizes)

    @property
    def state_count(self) -> int:
        return sum(self.layer_sizes)

    @property
    def offsets(self) -> np.ndarray:
        """Flat offset of the first state of each layer (0-based layer index)"""
        return np.concatenate(([0], np.cumsum(self.layer_sizes)[:-1])).astype(np.int64)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.layer_sizes)) == 1

    def size(self, layer: int) -> int:
        return self.layer_sizes[layer - 1]

    def contains(self, state: StateId) -> bool:
        return 1 <= state.layer <= self.horizon and 0 <= state.index < self.size(state.layer)

    def flat(self, state: StateId) -> int:
        """Position of a state in layer-major order"""
        if not self.contains(state):
            raise ValidationError(f"state {state} is outside the universe")
        return int(self.offsets[state.layer - 1]) + state.index

    def states(self, layer: Optional[int] = None) -> Iterator[StateId]:
        layers = [layer] if layer is not None else range(1, self.horizon + 1)
        for h in layers:
            for i in range(self.size(h)):
                yield StateId(h, i)

    def layer_of_flat(self) -> np.ndarray:
        """1-based layer of every flat state position"""
        return np.repeat(np.arange(1, self.horizon + 1), self.layer_sizes)


def _check_distribution(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if np.any(values < -PROB_TOL) or not np.all(np.isfinite(values)):
        raise ValidationError(f"{what} has negative or non-finite entries")
    totals = values.sum(axis=-1)
    if np.any(np.abs(totals - 1.0) > PROB_TOL):
        raise ValidationError(f"{what} does not sum to 1 within {PROB_TOL}")
    values = np.clip(values, 0.0, None)
    return values / values.sum(axis=-1, keepdims=True)


class LayeredMdp:
    """A finite-horizon MDP over a layered state space.

    Transitions are stored per layer as arrays of shape (S_h, A, S_{h+1}); layer
    H has no outgoing transitions. Rewards are point masses or Bernoulli draws
    whose parameter is the stored mean. Instances are immutable.
    """

    def __init__(
        self,
        layer_sizes: Sequence[int],
        action_count: int,
        transitions: Sequence[np.ndarray],
        reward_means: Sequence[np.ndarray],
        init: np.ndarray,
        bernoulli: Optional[Sequence[np.ndarray]] = None,
        audit_rewards: bool = True,
    ):
        self.universe = Universe(tuple(layer_sizes), action_count)
        H, A = self.horizon, self.action_count
        if len(transitions) != H - 1:
            raise ValidationError(f"expected {H - 1} transition layers, got {len(transitions)}")
        if len(reward_means) != H:
            raise ValidationError(f"expected {H} reward layers, got {len(reward_means)}")

        self._transitions: List[np.ndarray] = []
        for h, kernel in enumerate(transitions, start=1):
            kernel = np.asarray(kernel, dtype=float)
            expected = (self.universe.size(h), A, self.universe.size(h + 1))
            if kernel.shape != expected:
                raise ValidationError(f"layer {h} transitions have shape {kernel.shape}, expected {expected}")
            self._transitions.append(_check_distribution(kernel, f"transition kernel at layer {h}"))

        self._means: List[np.ndarray] = []
        self._bernoulli: List[np.ndarray] = []
        for h in range(1, H + 1):
            means = np.asarray(reward_means[h - 1], dtype=float)
            if means.shape != (self.universe.size(h), A):
                raise ValidationError(f"layer {h} rewards have shape {means.shape}")
            if np.any(means < 0.0) or np.any(means > 1.0):
                raise ValidationError(f"layer {h} rewards must lie in [0, 1]")
            flags = np.zeros_like(means, dtype=bool)
            if bernoulli is not None:
                flags = np.asarray(bernoulli[h - 1], dtype=bool).reshape(means.shape)
            self._means.append(means)
            self._bernoulli.append(flags)

        init = np.asarray(init, dtype=float)
        if init.shape != (self.universe.size(1),):
            raise ValidationError(f"initial distribution has shape {init.shape}")
        self._init = _check_distribution(init, "initial distribution")

        for array in self._transitions + self._means + self._bernoulli + [self._init]:
            array.setflags(write=False)
        self._cdfs = [np.cumsum(k, axis=-1) for k in self._transitions]
        for cdf in self._cdfs:
            cdf[..., -1] = 1.0
        self._init_cdf = np.cumsum(self._init)
        self._init_cdf[-1] = 1.0

        if audit_rewards and self.max_path_reward() > 1.0 + PROB_TOL:
            raise ValidationError(
                f"some trajectory can collect {self.max_path_reward():.6g} > 1 total reward"
            )

    @property
    def horizon(self) -> int:
        return self.universe.horizon

    @property
    def action_count(self) -> int:
        return self.universe.action_count

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return self.universe.layer_sizes

    @property
    def init(self) -> np.ndarray:
        return self._init

    def transition(self, h: int) -> np.ndarray:
        """Kernel of shape (S_h, A, S_{h+1}) for 1 <= h < H"""
        return self._transitions[h - 1]

    def reward_mean(self, h: int) -> np.ndarray:
        return self._means[h - 1]

    def is_bernoulli(self, h: int) -> np.ndarray:
        return self._bernoulli[h - 1]

    def reward_max(self, h: int) -> np.ndarray:
        """Largest value each reward distribution can produce"""
        means = self._means[h - 1]
        return np.where(self._bernoulli[h - 1], (means > 0).astype(float), means)

    def transition_cdf(self, h: int) -> np.ndarray:
        return self._cdfs[h - 1]

    @property
    def init_cdf(self) -> np.ndarray:
        return self._init_cdf

    def max_path_reward(self) -> float:
        """Largest total reward any reachable trajectory can collect"""
        best = self.reward_max(self.horizon).max(axis=1)
        for h in range(self.horizon - 1, 0, -1):
            support = self._transitions[h - 1] > 0
            future = np.where(support, best[None, None, :], -np.inf).max(axis=2)
            best = (self.reward_max(h) + future).max(axis=1)
        return float(best[self._init > 0].max())

    def is_deterministic(self) -> bool:
        """True when the initial state and every transition are point masses"""
        if np.count_nonzero(self._init) != 1:
            return False
        return all(np.all(np.count_nonzero(k, axis=-1) == 1) for k in self._transitions)

    def next_state(self, state: StateId, action: int) -> StateId:
        """Successor of (state, action) in a deterministic MDP"""
        row = self.transition(state.layer)[state.index, action]
        return StateId(state.layer + 1, int(np.argmax(row)))

    def initial_state(self) -> StateId:
        return StateId(1, int(np.argmax(self._init)))


@dataclass(frozen=True)
class Trajectory:
    """One episode: the state index, action and reward at each layer 1..H"""

    states: Tuple[int, ...]
    actions: Tuple[int, ...]
    rewards: Tuple[float, ...]

    @property
    def horizon(self) -> int:
        return len(self.states)

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))

    def state(self, h: int) -> StateId:
        return StateId(h, self.states[h - 1])

    def steps(self) -> List[Tuple[StateId, int, float]]:
        return [
            (StateId(h, s), a, r)
            for h, (s, a, r) in enumerate(zip(self.states, self.actions, self.rewards), start=1)
        ]

    def visits(self, state: StateId) -> bool:
        return 1 <= state.layer <= self.horizon and self.states[state.layer - 1] == state.index


@dataclass(frozen=True)
class TrajectoryBatch:
    """Many episodes stored column-wise as (n, H) arrays"""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray

    def __len__(self) -> int:
        return int(self.states.shape[0])

    @classmethod
    def empty(cls, horizon: int) -> "TrajectoryBatch":
        return cls(
            np.zeros((0, horizon), dtype=np.int64),
            np.zeros((0, horizon), dtype=np.int64),
            np.zeros((0, horizon), dtype=float),
        )

    def select(self, mask: np.ndarray) -> "TrajectoryBatch":
        return TrajectoryBatch(self.states[mask], self.actions[mask], self.rewards[mask])

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(
            tuple(int(s) for s in self.states[i]),
            tuple(int(a) for a in self.actions[i]),
            tuple(float(r) for r in self.rewards[i]),
        )

    def __iter__(self) -> Iterator[Trajectory]:
        for i in range(len(self)):
            yield self.trajectory(i)
