"""Policy-specific Markov reward processes, exact and importance-weighted.

For a policy pi with petal S_pi, an edge s -> s' (layer h < h') is the event
that after leaving s the trajectory next meets S_pi at s', or never meets it
again when s' = s_bot. Segments check pi's actions on layers h..h'-1 (1..h'-1
from s_top, through H towards s_bot) and collect the rewards of those layers.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..mdp.model import S_TOP, LayeredMdp, StateId, s_bot
from ..mdp.mrp import Mrp
from ..policies.policy import Policy, PolicyClass
from .collector import TrajDataset

logger = logging.getLogger(__name__)

Row = Dict[StateId, Tuple[float, float]]


def _split_states(s_pi: Iterable[StateId], s_rch: Iterable[StateId]):
    petal = frozenset(s_pi)
    reached = frozenset(s_rch)
    return petal, sorted(petal & reached), sorted(petal - reached)


def _exact_row(mdp: LayeredMdp, pi: Policy, petal: frozenset, source: StateId) -> Row:
    """Direct-transit probabilities and conditional rewards out of source"""
    H = mdp.horizon
    bottom = s_bot(H)
    joint: Dict[StateId, list] = {}

    if source == S_TOP:
        layer = 1
        mass = mdp.init.copy()
    else:
        layer = source.layer
        mass = np.zeros(mdp.universe.size(layer))
        mass[source.index] = 1.0
    reward = np.zeros_like(mass)

    while True:
        if source == S_TOP or layer > source.layer:
            for i in np.nonzero(mass)[0]:
                target = StateId(layer, int(i))
                if target in petal:
                    joint[target] = [mass[i], reward[i]]
                    mass[i] = 0.0
                    reward[i] = 0.0
        idx = np.arange(mdp.universe.size(layer))
        acts = pi.layer_actions(layer)
        step_reward = mdp.reward_mean(layer)[idx, acts]
        if layer == H:
            p = float(mass.sum())
            if p > 0:
                joint[bottom] = [p, float(reward.sum() + mass @ step_reward)]
            break
        kernel = mdp.transition(layer)[idx, acts]
        mass, reward = mass @ kernel, (reward + mass * step_reward) @ kernel
        layer += 1

    return {t: (float(p), float(r) / p if p > 0 else 0.0) for t, (p, r) in joint.items()}


def exact_policy_mrp(mdp: LayeredMdp, pi: Policy, s_pi: Iterable[StateId], s_rch: Iterable[StateId]) -> Mrp:
    """Population policy-specific MRP over S_pi plus the virtual start and end.

    Rows of s_top and of reached petal states hold exact direct-transit
    probabilities and conditional rewards; unreached petal states route to
    s_bot with probability 1 and reward 0.
    """
    if pi.universe != mdp.universe:
        raise ValidationError("policy and MDP live on different universes")
    petal, reached, remaining = _split_states(s_pi, s_rch)
    bottom = s_bot(mdp.horizon)
    edges = {}
    for source in [S_TOP] + reached:
        for target, value in _exact_row(mdp, pi, petal, source).items():
            edges[(source, target)] = value
    for source in remaining:
        edges[(source, bottom)] = (1.0, 0.0)
    return Mrp(mdp.horizon, petal, edges, exact=True)


@dataclass(frozen=True)
class RowEstimate:
    """Importance-weighted edge estimates out of one anchor.

    ``edges`` maps targets to (p_hat, r_hat) where r_hat estimates the joint
    quantity E[R 1{edge}]. ``violations`` counts trajectories consistent with
    pi on a petal-avoiding segment that no core policy explains.
    """

    edges: Dict[StateId, Tuple[float, float]]
    violations: int
    samples: int
    max_weight: float


def estimate_row(dataset: TrajDataset, core: PolicyClass, pi: Policy, s_pi: Iterable[StateId]) -> RowEstimate:
    """Estimate every edge leaving the dataset's anchor in one pass over the data"""
    universe = pi.universe
    if core.universe != universe:
        raise ValidationError("core policies and pi live on different universes")
    n = len(dataset)
    if n == 0:
        return RowEstimate({}, 0, 0, 0.0)
    source = dataset.anchor
    H = universe.horizon
    h = source.layer
    offsets = universe.offsets
    batch = dataset.batch

    petal_mask = np.zeros(universe.state_count, dtype=bool)
    for s in s_pi:
        petal_mask[universe.flat(s)] = True
    in_petal = petal_mask[offsets[None, :] + batch.states]

    after = in_petal[:, h:]
    if after.shape[1]:
        hit = after.any(axis=1)
        # 1-based layer of the first petal state strictly after the anchor, H+1 if none
        end_layer = np.where(hit, np.argmax(after, axis=1) + h + 1, H + 1)
    else:
        hit = np.zeros(n, dtype=bool)
        end_layer = np.full(n, H + 1)
    start = max(h, 1) - 1
    stop = end_layer - 1
    rows = np.arange(n)

    prefix = dataset.mismatch_prefix(offsets, pi.table)
    pi_ok = prefix[rows, stop] == prefix[:, start]
    core_prefix = dataset.core_prefix(offsets, core)
    core_ok = (core_prefix[:, rows, stop] == core_prefix[:, :, start]).sum(axis=0)
    coverage = core_ok / len(core)

    reward_prefix = np.zeros((n, H + 1))
    np.cumsum(batch.rewards, axis=1, out=reward_prefix[:, 1:])
    segment_reward = reward_prefix[rows, stop] - reward_prefix[:, start]

    orphan = pi_ok & (core_ok == 0)
    weights = np.zeros(n)
    good = pi_ok & ~orphan
    weights[good] = 1.0 / coverage[good]

    target_index = np.where(hit, batch.states[rows, np.minimum(stop, H - 1)], 0)
    edges: Dict[StateId, Tuple[float, float]] = {}
    keys = np.stack([end_layer, target_index], axis=1)[good]
    for layer, index in np.unique(keys, axis=0):
        target = StateId(int(layer), int(index) if layer <= H else 0)
        mask = good & (end_layer == layer) & (target_index == index)
        edges[target] = (
            float(weights[mask].sum() / n),
            float((weights[mask] * segment_reward[mask]).sum() / n),
        )
    violations = int(orphan.sum())
    if violations:
        logger.debug("%d trajectories from %s match pi but no core policy", violations, source)
    return RowEstimate(edges, violations, n, float(weights.max()))


def estimate_edge(dataset: TrajDataset, core: PolicyClass, pi: Policy, s_pi: Iterable[StateId],
                  s: StateId, s_next: StateId) -> Tuple[float, float]:
    """Importance-weighted (p_hat, r_hat) for the edge s -> s_next.

    r_hat estimates the expected segment reward jointly with the edge event.
    An empty dataset yields (0, 0).

    Raises:
        ValidationError: If s is not the dataset anchor or s_next is not later
    """
    if s != dataset.anchor:
        raise ValidationError(f"dataset is anchored at {dataset.anchor}, not {s}")
    if s_next.layer <= s.layer:
        raise ValidationError("edges must move to a later layer")
    return estimate_row(dataset, core, pi, s_pi).edges.get(s_next, (0.0, 0.0))


@dataclass(frozen=True)
class EmpiricalMrp:
    """Estimated policy-specific MRP with the bookkeeping behind it"""

    mrp: Mrp
    counts: Dict[StateId, int]
    K: int
    violations: int
    missing: Tuple[StateId, ...] = field(default=())


def build_empirical_mrp(
    datasets: Mapping[StateId, TrajDataset],
    core: PolicyClass,
    pi: Policy,
    s_pi: Iterable[StateId],
    s_rch: Iterable[StateId],
    rows: Optional[Dict[StateId, RowEstimate]] = None,
) -> EmpiricalMrp:
    """Assemble the estimated MRP for pi from the datasets of reached states.

    Args:
        rows: Optional cache of RowEstimate per anchor, filled in place

    Raises:
        ValidationError: If a reached petal state (or s_top) has no dataset
    """
    petal, reached, remaining = _split_states(s_pi, s_rch)
    H = pi.universe.horizon
    bottom = s_bot(H)
    rows = {} if rows is None else rows
    edges, counts, violations = {}, {}, 0
    for source in [S_TOP] + reached:
        if source not in datasets:
            raise ValidationError(f"no dataset collected for reached state {source}")
        if source not in rows:
            rows[source] = estimate_row(datasets[source], core, pi, petal)
        row = rows[source]
        counts[source] = row.samples
        violations += row.violations
        for target, (p, r_joint) in row.edges.items():
            edges[(source, target)] = (p, r_joint / p if p > 0 else 0.0)
    for source in remaining:
        edges[(source, bottom)] = (1.0, 0.0)
    mrp = Mrp(H, petal, edges, exact=False, bound=float(len(core)))
    missing = tuple(s for s in reached if counts.get(s, 0) == 0)
    return EmpiricalMrp(mrp, counts, len(core), violations, missing)
