"""Combination-lock hard instances built from a block-free matrix.

Every layer holds 2J states: lock j owns the pair (h, 2j) and (h, 2j+1). A
decoder picks which of the two is the good state at each layer; layer 1 always
starts on (1, 2j).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet

import numpy as np

from ..core.errors import ValidationError
from ..mdp.model import LayeredMdp, Universe
from ..policies.policy import Policy, PolicyClass
from .blockfree import BlockFreeMatrix

logger = logging.getLogger(__name__)

GOOD_REWARD = 0.75
BASE_REWARD = 0.5


def lock_universe(J: int, H: int) -> Universe:
    return Universe.uniform(2 * J, H, 2)


def build_pi_ell(matrix: BlockFreeMatrix, H: int, J: int) -> PolicyClass:
    """Policies encoding, on each lock, the running column count in binary.

    Member i plays bit h-1 of sum_{a <= i} B[a, j] on both states of lock j at
    layer h when B[i, j] = 1, and action 0 on lock j otherwise. Zero rows
    collapse into the all-zero policy.

    Raises:
        ValidationError: If d != J or a column count does not fit in H bits
    """
    B = np.asarray(matrix.B, dtype=np.int64)
    N, d = B.shape
    if d != J:
        raise ValidationError(f"matrix has {d} columns but the instance has {J} locks")
    if 2 * matrix.eps * N >= 2**H or B.sum(axis=0).max(initial=0) >= 2**H:
        raise ValidationError(f"column counts need more than H={H} bits")
    universe = lock_universe(J, H)
    counts = np.cumsum(B, axis=0) * B
    bits = (counts[:, None, :] >> np.arange(H)[None, :, None]) & 1
    # (N, H, J) -> (N, H, 2J): both states of a lock play the same bit
    tables = np.repeat(bits, 2, axis=2).reshape(N, -1)
    pclass = PolicyClass.from_tables(universe, tables, tag="pi_ell", params={"ell": matrix.ell, "H": H, "J": J})
    logger.debug("built %d distinct policies from a %dx%d matrix", len(pclass), N, d)
    return pclass


def relevant_locks(policy: Policy) -> FrozenSet[int]:
    """Locks on which the policy plays a nonzero action somewhere"""
    return frozenset(s.index // 2 for s in policy.support())


def sample_decoder(J: int, H: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean (J, H) array; True at (j, h-1) when (h, 2j) is lock j's good state"""
    phi = rng.random((J, H)) < 0.5
    phi[:, 0] = True
    return phi


@dataclass(frozen=True)
class HardInstance:
    pclass: PolicyClass
    pistar_index: int
    phi: np.ndarray
    mdp: LayeredMdp
    relevant: FrozenSet[int] = field(default_factory=frozenset)

    @property
    def J(self) -> int:
        return self.phi.shape[0]

    @property
    def H(self) -> int:
        return self.phi.shape[1]

    @property
    def pistar(self) -> Policy:
        return self.pclass[self.pistar_index]

    def good_state(self, j: int, h: int) -> int:
        return 2 * j if self.phi[j, h - 1] else 2 * j + 1


def _lock_kernel(J: int, jump) -> np.ndarray:
    kernel = np.zeros((2 * J, 2, 2 * J))
    for j in range(J):
        for side in (2 * j, 2 * j + 1):
            for a in (0, 1):
                kernel[side, a] = jump(j, side, a)
    return kernel


def build_hard_mdp(pclass: PolicyClass, pistar_index: int, phi: np.ndarray, J: int, H: int) -> HardInstance:
    """The lock MDP planted with pi* = pclass[pistar_index] and decoder phi.

    On locks relevant to pi*, following pi*'s action from the good state keeps
    the agent on the good side and any other move drops it to the bad side for
    good; the last layer pays Ber(3/4) for pi*'s action on the good state and
    Ber(1/2) elsewhere. Irrelevant locks move uniformly within the lock.
    """
    universe = lock_universe(J, H)
    if pclass.universe != universe:
        raise ValidationError("policy class does not live on the lock universe")
    if not 0 <= pistar_index < len(pclass):
        raise ValidationError(f"pi* index {pistar_index} outside a class of {len(pclass)}")
    phi = np.asarray(phi, dtype=bool)
    if phi.shape != (J, H) or not phi[:, 0].all():
        raise ValidationError("decoder must have shape (J, H) and select (1, 2j) at layer 1")
    pistar = pclass[pistar_index]
    relevant = relevant_locks(pistar)

    def good(j: int, h: int) -> int:
        return 2 * j if phi[j, h - 1] else 2 * j + 1

    transitions = []
    for h in range(1, H):
        acts = pistar.layer_actions(h)

        def jump(j: int, side: int, a: int) -> np.ndarray:
            row = np.zeros(2 * J)
            if j not in relevant:
                row[[2 * j, 2 * j + 1]] = 0.5
            elif side == good(j, h) and a == acts[side]:
                row[good(j, h + 1)] = 1.0
            else:
                row[4 * j + 1 - good(j, h + 1)] = 1.0
            return row

        transitions.append(_lock_kernel(J, jump))

    rewards = [np.zeros((2 * J, 2)) for _ in range(H)]
    flags = [np.zeros((2 * J, 2), dtype=bool) for _ in range(H)]
    rewards[-1][:] = BASE_REWARD
    flags[-1][:] = True
    last = pistar.layer_actions(H)
    for j in relevant:
        g = good(j, H)
        rewards[-1][g, last[g]] = GOOD_REWARD
    init = np.zeros(2 * J)
    init[0::2] = 1.0 / J
    mdp = LayeredMdp(universe.layer_sizes, 2, transitions, rewards, init, bernoulli=flags)
    return HardInstance(pclass, pistar_index, phi, mdp, relevant)


def build_reference_mdp(J: int, H: int) -> LayeredMdp:
    """Every lock moves uniformly within its pair; the last layer pays Ber(1/2)"""
    universe = lock_universe(J, H)

    def jump(j: int, side: int, a: int) -> np.ndarray:
        row = np.zeros(2 * J)
        row[[2 * j, 2 * j + 1]] = 0.5
        return row

    transitions = [_lock_kernel(J, jump) for h in range(1, H)]
    rewards = [np.zeros((2 * J, 2)) for _ in range(H - 1)] + [np.full((2 * J, 2), BASE_REWARD)]
    flags = [np.zeros((2 * J, 2), dtype=bool) for _ in range(H - 1)] + [np.ones((2 * J, 2), dtype=bool)]
    init = np.zeros(2 * J)
    init[0::2] = 1.0 / J
    return LayeredMdp(universe.layer_sizes, 2, transitions, rewards, init, bernoulli=flags)


def exact_value_hard(instance: HardInstance, policy: Policy) -> float:
    """1/2 + (1/4) (1/J) #{relevant j : policy follows pi* along lock j's good chain}"""
    matches = 0
    for j in instance.relevant:
        chain = [(h, instance.good_state(j, h)) for h in range(1, instance.H + 1)]
        if all(policy.layer_actions(h)[i] == instance.pistar.layer_actions(h)[i] for h, i in chain):
            matches += 1
    return BASE_REWARD + (GOOD_REWARD - BASE_REWARD) * matches / instance.J


@dataclass(frozen=True)
class PiEllAudit:
    """Structural identities of a Pi^(ell) class against its matrix.

    The identities must hold for any matrix; the interval checks only hold
    when the matrix itself has the row, column and block-free properties.
    """

    column_counts: bool
    row_counts: bool
    words_unique: bool
    sides_agree: bool
    row_interval: bool
    column_interval: bool
    blockfree: bool

    @property
    def structural_ok(self) -> bool:
        return self.column_counts and self.row_counts and self.words_unique and self.sides_agree

    def to_dict(self) -> Dict[str, bool]:
        return {
            "column_counts": self.column_counts,
            "row_counts": self.row_counts,
            "words_unique": self.words_unique,
            "sides_agree": self.sides_agree,
            "row_interval": self.row_interval,
            "column_interval": self.column_interval,
            "blockfree": self.blockfree,
            "structural_ok": self.structural_ok,
        }


def audit_pi_ell(matrix: BlockFreeMatrix, pclass: PolicyClass, J: int) -> PiEllAudit:
    """Check |Pi_j| = column sum, |J_rel(pi)| = row sum, distinct words per lock
    and equal actions on both sides of every lock"""
    B = np.asarray(matrix.B, dtype=np.int64)
    H = pclass.horizon
    tables = pclass.tables.reshape(len(pclass), H, J, 2)
    sides_agree = bool(np.all(tables[..., 0] == tables[..., 1]))
    words = tables[..., 0]  # (members, H, J)
    active = words.any(axis=1)  # (members, J)

    column_counts = bool(np.array_equal(active.sum(axis=0), B.sum(axis=0)))
    row_sizes = sorted(int(s) for s in B.sum(axis=1) if s > 0)
    member_sizes = sorted(int(s) for s in active.sum(axis=1) if s > 0)
    row_counts = row_sizes == member_sizes

    words_unique = True
    for j in range(J):
        on_lock = words[active[:, j], :, j]
        if len(np.unique(on_lock, axis=0)) != len(on_lock):
            words_unique = False
            break

    props = matrix.properties()
    return PiEllAudit(
        column_counts=column_counts,
        row_counts=row_counts,
        words_unique=words_unique,
        sides_agree=sides_agree,
        row_interval=props.rows_ok,
        column_interval=props.columns_ok,
        blockfree=props.blockfree_ok,
    )
