"""Policy evaluation through reachable-state identification (POPLER)"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..capacity.search import spanning_capacity
from ..core.errors import GuardExceeded, ValidationError
from ..mdp.model import S_TOP, LayeredMdp, StateId
from ..mdp.mrp import mrp_reach_prob, mrp_value
from ..policies.policy import PolicyClass
from ..sunflower.cert import SunflowerCert
from .collector import ReachedSet, TrajDataset, data_collector
from .estimation import RowEstimate, build_empirical_mrp

logger = logging.getLogger(__name__)


def default_sample_sizes(K: int, D: int, class_size: int, eps: float, delta: float,
                         c1: float = 1.0, c2: float = 1.0) -> Tuple[int, int]:
    """Dataset sizes (n1 for s_top, n2 per identified state) from the sample-size formula"""
    if not 0 < eps <= 1 or not 0 < delta < 1:
        raise ValidationError("eps must lie in (0, 1] and delta in (0, 1)")
    n1 = c1 * (D + 1) ** 4 * K**2 * math.log(class_size * (D + 1) / delta) / eps**2
    n2 = c2 * D**3 * (D + 1) ** 2 * K**2 * math.log(class_size * (D + 1) ** 2 / delta) / eps**3
    return max(1, math.ceil(n1)), max(1, math.ceil(n2))


@dataclass
class PoplerReport:
    """Everything POPLER learned on one run"""

    best_index: int
    values: List[float]
    reached: List[dict]
    dataset_sizes: Dict[str, Tuple[int, int]]
    iterations: int
    insertions: int
    violations: int
    n1: int
    n2: int
    threshold: Optional[float]
    iteration_cap: Optional[int]
    max_weight: float = 0.0
    reach_estimates: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_index": self.best_index,
            "values": list(self.values),
            "reached": list(self.reached),
            "dataset_sizes": {k: list(v) for k, v in self.dataset_sizes.items()},
            "iterations": self.iterations,
            "insertions": self.insertions,
            "violations": self.violations,
            "n1": self.n1,
            "n2": self.n2,
            "threshold": self.threshold,
            "iteration_cap": self.iteration_cap,
            "max_weight": self.max_weight,
        }


def popler(
    mdp: LayeredMdp,
    pclass: PolicyClass,
    cert: SunflowerCert,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    n1: Optional[int] = None,
    n2: Optional[int] = None,
    capacity_bound: Optional[int] = None,
    c1: float = 1.0,
    c2: float = 1.0,
) -> Tuple[int, PoplerReport]:
    """Learn a near-optimal member of pclass from online episodes.

    The identification phase repeatedly estimates every member's MRP from the
    datasets gathered so far and adds the first unreached petal state whose
    estimated reachability is at least eps / (6 D), collecting a fresh dataset
    through it. The evaluation phase then scores every member on its
    estimated MRP.

    Args:
        mdp: Environment, sampled episode by episode
        pclass: Candidate policies
        cert: Sunflower certificate covering pclass
        eps: Target accuracy
        delta: Failure probability used by the default sample sizes
        rng: Random stream
        n1: Episodes from s_top (default from the sample-size formula)
        n2: Attempts per identified state (default from the sample-size formula)
        capacity_bound: Upper bound on the class capacity used by the
            iteration cap; computed when omitted
        c1, c2: Constants of the sample-size formula

    Returns:
        (index of the returned member, PoplerReport)

    Raises:
        ValidationError: If the certificate does not cover the class or the
            class does not act on the MDP
        GuardExceeded: If identification runs past 12 H D c / eps iterations
    """
    cert.require_covers(pclass)
    if pclass.universe != mdp.universe:
        raise ValidationError("policy class and MDP live on different universes")
    core, D, H = cert.core, cert.D, mdp.horizon
    K = len(core)
    d1, d2 = default_sample_sizes(K, D, len(pclass), eps, delta, c1, c2)
    n1 = d1 if n1 is None else n1
    n2 = d2 if n2 is None else n2
    if n1 < 1 or n2 < 1:
        raise ValidationError("n1 and n2 must be positive")

    reached = ReachedSet()
    datasets: Dict[StateId, TrajDataset] = {S_TOP: data_collector(mdp, S_TOP, None, core, n1, rng)}
    rows: List[Dict[StateId, RowEstimate]] = [{} for _ in pclass]
    iterations = insertions = 0
    threshold = cap = None
    reach_estimates: List[float] = []

    if D > 0:
        threshold = eps / (6 * D)
        if capacity_bound is None:
            result = spanning_capacity(pclass, witness=False)
            capacity_bound = result.value if result.exact else len(pclass)
        cap = math.ceil(12 * H * D * capacity_bound / eps)
        while True:
            iterations += 1
            found = None
            for m, pi in enumerate(pclass):
                remaining = sorted(cert.petals[m] - reached.states)
                if not remaining:
                    continue
                empirical = build_empirical_mrp(datasets, core, pi, cert.petals[m], reached.states, rows[m])
                for s_bar in remaining:
                    estimate = mrp_reach_prob(empirical.mrp, s_bar)
                    if estimate >= threshold:
                        found = (s_bar, m, estimate)
                        break
                if found:
                    break
            if found is None:
                break
            s_bar, m, estimate = found
            if insertions >= cap:
                raise GuardExceeded(
                    f"identification exceeded {cap} iterations (|T|={len(reached)}, next state {s_bar})"
                )
            logger.debug("iteration %d: adding %s reached by member %d (estimate %.4g)", iterations, s_bar, m, estimate)
            reached.add(s_bar, pclass[m], m)
            reach_estimates.append(estimate)
            datasets[s_bar] = data_collector(mdp, s_bar, pclass[m], core, n2, rng)
            insertions += 1

    values, violations, max_weight = [], 0, 0.0
    for m, pi in enumerate(pclass):
        empirical = build_empirical_mrp(datasets, core, pi, cert.petals[m], reached.states, rows[m])
        values.append(mrp_value(empirical.mrp))
        violations += empirical.violations
        max_weight = max([max_weight] + [row.max_weight for row in rows[m].values()])
    best = int(np.argmax(values))
    logger.info("returned member %d with estimated value %.4f after %d identification passes", best, values[best], iterations)

    report = PoplerReport(
        best_index=best,
        values=values,
        reached=reached.to_list(),
        dataset_sizes={str(s): (ds.requested, ds.accepted) for s, ds in datasets.items()},
        iterations=iterations,
        insertions=insertions,
        violations=violations,
        n1=n1,
        n2=n2,
        threshold=threshold,
        iteration_cap=cap,
        max_weight=max_weight,
        reach_estimates=reach_estimates,
    )
    return best, report
