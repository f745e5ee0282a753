"""Constructive builders for the structured policy classes"""

import itertools
from math import comb
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..core.errors import GuardExceeded, ValidationError
from ..mdp.model import Universe
from .policy import Policy, PolicyClass

MAX_CLASS_SIZE = 10**6
MAX_TABLE_ENTRIES = 10**8


def _check_positive(**values: int) -> None:
    for name, value in values.items():
        if value < 1:
            raise ValidationError(f"{name} must be at least 1, got {value}")


def _guard(size: int, what: str) -> None:
    if size > MAX_CLASS_SIZE:
        raise GuardExceeded(f"{what} would have {size} members (limit {MAX_CLASS_SIZE})")


def build_singletons(K: int, H: int) -> PolicyClass:
    """pi_(i,h) plays 1 on s_(i,h) and 0 everywhere else"""
    _check_positive(K=K, H=H)
    universe = Universe.uniform(K, H, 2)
    tables = np.eye(universe.state_count, dtype=np.int64)
    return PolicyClass.from_tables(universe, tables, "singleton", {"K": K, "H": H})


def build_ltons(K: int, H: int, ell: int) -> PolicyClass:
    """pi_I(s) = 1{s in I} for every state subset I with |I| <= ell, smallest first"""
    _check_positive(K=K, H=H)
    if ell < 0:
        raise ValidationError(f"ell must be non-negative, got {ell}")
    universe = Universe.uniform(K, H, 2)
    S = universe.state_count
    ell = min(ell, S)
    _guard(sum(comb(S, i) for i in range(ell + 1)), "the l-ton class")
    members = []
    for size in range(ell + 1):
        for subset in itertools.combinations(range(S), size):
            table = np.zeros(S, dtype=np.int64)
            table[list(subset)] = 1
            members.append(Policy(universe, table))
    return PolicyClass.from_members(universe, members, "lton", {"K": K, "H": H, "ell": ell})


def _column_class(K: int, H: int, columns) -> list:
    universe = Universe.uniform(K, H, 2)
    members = []
    for j in columns:
        for bits in itertools.product((0, 1), repeat=H):
            table = np.zeros((H, K), dtype=np.int64)
            table[:, j] = bits
            members.append(Policy(universe, table.reshape(-1)))
    return members


def build_one_active(K: int, H: int) -> PolicyClass:
    """2^H policies free only on the first state of every layer"""
    _check_positive(K=K, H=H)
    _guard(2**H, "the one-active class")
    members = _column_class(K, H, [0])
    return PolicyClass.from_members(Universe.uniform(K, H, 2), members, "one_active", {"K": K, "H": H})


def build_all_active(K: int, H: int) -> PolicyClass:
    """Union over columns j of the policies free only on column j"""
    _check_positive(K=K, H=H)
    _guard(K * 2**H, "the all-active class")
    members = _column_class(K, H, range(K))
    return PolicyClass.from_members(Universe.uniform(K, H, 2), members, "all_active", {"K": K, "H": H})


def build_tabular(K: int, H: int, A: int) -> PolicyClass:
    """Every deterministic policy on K states per layer"""
    _check_positive(K=K, H=H, A=A)
    universe = Universe.uniform(K, H, A)
    _guard(A ** universe.state_count, "the tabular class")
    tables = np.array(list(itertools.product(range(A), repeat=universe.state_count)), dtype=np.int64)
    return PolicyClass.from_tables(universe, tables, "tabular", {"K": K, "H": H, "A": A})


def build_cb_chain(H: int, A: int, K: Optional[int] = None) -> PolicyClass:
    """A^H policies that play one fixed action per layer regardless of state.

    K defaults to A^(H-1) states per layer, enough for a deterministic MDP to
    keep every action prefix on its own state.
    """
    if K is None:
        K = A ** (H - 1) if H >= 1 and A >= 1 else 1
    _check_positive(K=K, H=H, A=A)
    _guard(A**H, "the layer-constant class")
    entries = A**H * K * H
    if entries > MAX_TABLE_ENTRIES:
        raise GuardExceeded(f"the layer-constant class tables would hold {entries} entries (limit {MAX_TABLE_ENTRIES})")
    universe = Universe.uniform(K, H, A)
    tables = [np.repeat(np.array(seq, dtype=np.int64), K) for seq in itertools.product(range(A), repeat=H)]
    return PolicyClass.from_tables(universe, np.array(tables), "cb_chain", {"H": H, "A": A, "K": K})


def build_threshold(K: int, H: int) -> PolicyClass:
    """pi_i(s_(j,h)) = 1{j >= i} for i = 1..K, identical on every layer"""
    _check_positive(K=K, H=H)
    universe = Universe.uniform(K, H, 2)
    j = np.arange(1, K + 1)
    tables = [np.tile((j >= i).astype(np.int64), H) for i in range(1, K + 1)]
    return PolicyClass.from_tables(universe, np.array(tables), "threshold", {"K": K, "H": H})


def tree_node(prefix) -> int:
    """Index of the binary-tree node reached by an action prefix"""
    index = 0
    for a in prefix:
        index = 2 * index + int(a)
    return index


def build_tree_paths(H: int) -> PolicyClass:
    """One policy per action sequence on a full binary tree of states.

    Layer h holds 2^(h-1) states, one per action prefix. pi_a follows a along
    its own path and plays 0 off it.
    """
    _check_positive(H=H)
    _guard(2**H, "the tree-path class")
    universe = Universe(tuple(2 ** (h - 1) for h in range(1, H + 1)), 2)
    offsets = universe.offsets
    members = []
    for seq in itertools.product((0, 1), repeat=H):
        table = np.zeros(universe.state_count, dtype=np.int64)
        for h in range(1, H + 1):
            table[offsets[h - 1] + tree_node(seq[: h - 1])] = seq[h - 1]
        members.append(Policy(universe, table))
    return PolicyClass.from_members(universe, members, "tree_paths", {"H": H})


def build_constant(universe: Universe) -> PolicyClass:
    """The A policies that play a single action everywhere"""
    members = [Policy.constant(universe, a) for a in range(universe.action_count)]
    return PolicyClass.from_members(universe, members)


def build_layer_indicator(universe: Universe) -> PolicyClass:
    """pi_0 together with pi_h = "play 1 on every state of layer h" for each h"""
    if universe.action_count < 2:
        raise ValidationError("layer-indicator policies need at least two actions")
    layers = universe.layer_of_flat()
    members = [Policy.constant(universe, 0)]
    members += [Policy(universe, (layers == h).astype(np.int64)) for h in range(1, universe.horizon + 1)]
    return PolicyClass.from_members(universe, members)


CLASS_BUILDERS: Dict[str, Tuple[Callable[..., PolicyClass], Tuple[str, ...]]] = {
    "singleton": (build_singletons, ("K", "H")),
    "lton": (build_ltons, ("K", "H", "ell")),
    "one_active": (build_one_active, ("K", "H")),
    "all_active": (build_all_active, ("K", "H")),
    "tabular": (build_tabular, ("K", "H", "A")),
    "cb_chain": (build_cb_chain, ("H", "A", "K")),
    "threshold": (build_threshold, ("K", "H")),
    "tree_paths": (build_tree_paths, ("H",)),
}


def build_class(tag: str, params: Dict[str, int]) -> PolicyClass:
    """Build a structured class from its tag and parameters"""
    if tag not in CLASS_BUILDERS:
        raise ValidationError(f"no builder for class tag '{tag}' (known: {', '.join(CLASS_BUILDERS)})")
    builder, names = CLASS_BUILDERS[tag]
    unknown = set(params) - set(names)
    if unknown:
        raise ValidationError(f"unknown parameters for '{tag}': {', '.join(sorted(unknown))}")
    return builder(**{k: int(v) for k, v in params.items()})


def parse_class_spec(text: str) -> PolicyClass:
    """Build a class from 'tag:K=4,H=3' style text"""
    tag, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"expected key=value in class text, got '{item}'")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            raise ValidationError(f"class parameter {key} must be an integer, got '{value}'")
    return build_class(tag.strip(), params)
