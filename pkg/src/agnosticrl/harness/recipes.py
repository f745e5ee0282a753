"""Named experiment recipes run by the batch harness.

A recipe prepares (and validates) its instance once from the config, then
produces one flat record per replication. Randomness for replication r and
step k comes from ``derive_rng(seed, k, r)``; preparation uses step 0.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..baselines.importance import importance_sampling
from ..baselines.trajtree import GenerativeOracle, trajectory_tree
from ..capacity.coverability import coverability
from ..capacity.search import spanning_capacity
from ..core.config import ExperimentConfig, get_param
from ..core.errors import ValidationError
from ..core.seeding import derive_rng
from ..lowerbound.blockfree import sample_blockfree_matrix
from ..lowerbound.instance import (
    BASE_REWARD,
    GOOD_REWARD,
    audit_pi_ell,
    build_hard_mdp,
    build_pi_ell,
    build_reference_mdp,
    exact_value_hard,
    sample_decoder,
)
from ..mdp.dynamics import exact_policy_value
from ..mdp.formats import read_mdp
from ..mdp.generators import random_mdp
from ..mdp.model import LayeredMdp
from ..policies.builders import build_singletons, parse_class_spec
from ..policies.formats import read_class
from ..policies.policy import Policy, PolicyClass
from ..popler.algorithm import popler
from ..sunflower.cert import SunflowerCert, build_cert
from ..sunflower.formats import read_cert

logger = logging.getLogger(__name__)

PREPARE_STEP = 0
VALUE_TOL = 1e-9

Record = Dict[str, Any]


@dataclass(frozen=True)
class Recipe:
    name: str
    description: str
    columns: Tuple[str, ...]
    prepare: Callable[[ExperimentConfig], Any]
    replicate: Callable[[Any, ExperimentConfig, int], Record]
    summarize: Callable[[List[Record]], Dict[str, Any]]
    accept: Callable[[Dict[str, Any], Dict[str, Any]], List[str]]


def _rate(records: List[Record], key: str) -> float:
    return float(np.mean([bool(r[key]) for r in records])) if records else 0.0


def _max(records: List[Record], key: str) -> float:
    values = [r[key] for r in records if r[key] is not None]
    return float(max(values)) if values else 0.0


def _at_least(aggregate: Dict[str, Any], acceptance: Dict[str, Any], key: str, field: str) -> List[str]:
    if key not in acceptance:
        return []
    bound = float(acceptance[key])
    return [] if aggregate[field] >= bound else [f"{field} = {aggregate[field]:.6g} is below {bound:.6g}"]


def _at_most(aggregate: Dict[str, Any], acceptance: Dict[str, Any], key: str, field: str) -> List[str]:
    if key not in acceptance:
        return []
    bound = float(acceptance[key])
    return [] if aggregate[field] <= bound else [f"{field} = {aggregate[field]:.6g} exceeds {bound:.6g}"]


# --- instances ---------------------------------------------------------------


def planted_singleton_mdp(reach: float = 0.9, good_mean: float = 0.85) -> LayeredMdp:
    """Two layers of three states under the singleton class.

    From the single start state, action 0 reaches state 0 of layer 2 with
    probability ``reach`` (state 2 otherwise) and action 1 reaches state 1.
    Layer 2 pays Ber(good_mean) for action 1 on state 0 and Ber(1/2) elsewhere,
    so the member playing 1 on (2, 0) is the unique optimum.
    """
    K, A = 3, 2
    init = np.array([1.0, 0.0, 0.0])
    kernel = np.zeros((K, A, K))
    kernel[:, :, 1] = 1.0
    kernel[0, 0] = [reach, 0.0, 1.0 - reach]
    rewards = [np.zeros((K, A)), np.full((K, A), 0.5)]
    rewards[1][0, 1] = good_mean
    flags = [np.zeros((K, A), dtype=bool), np.ones((K, A), dtype=bool)]
    return LayeredMdp((K, K), A, [kernel], rewards, init, bernoulli=flags)


def load_class(instance: Dict[str, Any], default: Optional[str] = None) -> PolicyClass:
    if "class_file" in instance:
        return read_class(instance["class_file"])
    text = instance.get("class", default)
    if text is None:
        raise ValidationError("instance needs 'class' or 'class_file'")
    return parse_class_spec(str(text))


@dataclass(frozen=True)
class PlantedContext:
    mdp: LayeredMdp
    pclass: PolicyClass
    cert: Optional[SunflowerCert]
    values: Tuple[float, ...]
    optimum: float
    capacity: int


def _prepare_planted(config: ExperimentConfig, need_cert: bool) -> PlantedContext:
    instance = config.instance
    if "mdp_file" in instance:
        mdp = read_mdp(instance["mdp_file"])
        pclass = load_class(instance)
    else:
        mdp = planted_singleton_mdp(get_param(instance, "reach", 0.9, float), get_param(instance, "good_mean", 0.85, float))
        pclass = build_singletons(3, 2)
    if pclass.universe != mdp.universe:
        raise ValidationError("instance class and MDP live on different universes")
    cert = None
    if need_cert:
        cert = read_cert(instance["cert_file"]) if "cert_file" in instance else build_cert(pclass)
        cert.require_covers(pclass)
    values = tuple(exact_policy_value(mdp, p) for p in pclass)
    result = spanning_capacity(pclass, witness=False)
    capacity = result.value if result.exact else len(pclass)
    return PlantedContext(mdp, pclass, cert, values, max(values), capacity)


# --- capacity-sweep ----------------------------------------------------------


def closed_form_capacity(tag: str, params: Dict[str, int]) -> Optional[int]:
    """Known capacity of a structured class, None when there is no closed form"""
    H = params.get("H")
    if H is None:
        return None
    if tag == "singleton" and params["K"] >= 2:
        return min(H, params["K"]) + 1
    if tag == "one_active":
        return min(H, params["K"]) + 1
    if tag == "cb_chain":
        return params["A"] * min(params["K"], params["A"] ** (H - 1))
    if tag == "threshold":
        return min(params["K"], 2**H)
    if tag == "tree_paths":
        return 2**H
    return None


def _sweep_spec(config: ExperimentConfig, replication: int) -> str:
    """The instance class text with the swept parameter set for this replication"""
    instance = config.instance
    base = str(instance.get("class", "singleton:K=6"))
    key = str(instance.get("sweep", "H"))
    value = get_param(instance, "start", 1, int) + replication
    return f"{base}{',' if ':' in base else ':'}{key}={value}"


def _prepare_sweep(config: ExperimentConfig) -> Dict[str, Any]:
    return {"budget": get_param(config.algorithm, "node_budget", 10**7, int)}


def _replicate_sweep(context: Dict[str, Any], config: ExperimentConfig, replication: int) -> Record:
    pclass = parse_class_spec(_sweep_spec(config, replication))
    tag, params = pclass.tag, pclass.params
    result = spanning_capacity(pclass, context["budget"], witness=False)
    expected = closed_form_capacity(tag, params)
    return {
        "replication": replication,
        "class": f"{tag}:" + ",".join(f"{k}={v}" for k, v in sorted(params.items())),
        "size": len(pclass),
        "capacity": result.value,
        "expected": expected,
        "matches": expected is None or expected == result.value,
        "exact": result.exact,
        "nodes_expanded": result.nodes_expanded,
    }


def _summarize_sweep(records: List[Record]) -> Dict[str, Any]:
    return {
        "points": len(records),
        "match_rate": _rate(records, "matches"),
        "exact_rate": _rate(records, "exact"),
        "max_capacity": int(_max(records, "capacity")),
    }


def _accept_sweep(aggregate: Dict[str, Any], acceptance: Dict[str, Any]) -> List[str]:
    return _at_least(aggregate, acceptance, "min_match_rate", "match_rate")


# --- coverability-check ------------------------------------------------------


def _prepare_coverability(config: ExperimentConfig) -> Dict[str, Any]:
    pclass = load_class(config.instance, "singleton:K=3,H=3")
    result = spanning_capacity(pclass, get_param(config.algorithm, "node_budget", 10**7, int))
    witness = result.witness
    witness_value = coverability(pclass, witness.mdp) if witness is not None else 0.0
    return {"pclass": pclass, "capacity": result.value, "exact": result.exact, "witness_value": witness_value}


def _replicate_coverability(context: Dict[str, Any], config: ExperimentConfig, replication: int) -> Record:
    pclass = context["pclass"]
    rng = derive_rng(config.seed, 1, replication)
    mdp = random_mdp(
        pclass.universe.layer_sizes,
        pclass.action_count,
        rng,
        deterministic=bool(config.instance.get("deterministic", False)),
        sparsity=get_param(config.instance, "sparsity", 0.0, float),
    )
    value = coverability(pclass, mdp)
    return {
        "replication": replication,
        "coverability": value,
        "capacity": context["capacity"],
        "dominated": value <= context["capacity"] + VALUE_TOL,
        "witness_coverability": context["witness_value"],
        "witness_tight": abs(context["witness_value"] - context["capacity"]) <= VALUE_TOL,
    }


def _summarize_coverability(records: List[Record]) -> Dict[str, Any]:
    return {
        "dominated_rate": _rate(records, "dominated"),
        "witness_tight_rate": _rate(records, "witness_tight"),
        "max_coverability": _max(records, "coverability"),
    }


def _accept_coverability(aggregate: Dict[str, Any], acceptance: Dict[str, Any]) -> List[str]:
    return _at_least(aggregate, acceptance, "min_dominated_rate", "dominated_rate") + _at_least(
        aggregate, acceptance, "min_witness_tight_rate", "witness_tight_rate"
    )


# --- popler-e2e --------------------------------------------------------------


def _prepare_popler(config: ExperimentConfig) -> PlantedContext:
    return _prepare_planted(config, need_cert=True)


def _replicate_popler(context: PlantedContext, config: ExperimentConfig, replication: int) -> Record:
    algorithm = config.algorithm
    eps = get_param(algorithm, "eps", 0.1, float)
    best, report = popler(
        context.mdp,
        context.pclass,
        context.cert,
        eps=eps,
        delta=get_param(algorithm, "delta", 0.1, float),
        rng=derive_rng(config.seed, 1, replication),
        n1=get_param(algorithm, "n1", None, int),
        n2=get_param(algorithm, "n2", None, int),
        capacity_bound=context.capacity,
        c1=get_param(algorithm, "c1", 1.0, float),
        c2=get_param(algorithm, "c2", 1.0, float),
    )
    errors = np.abs(np.array(report.values) - np.array(context.values))
    bound = 12 * context.mdp.horizon * context.cert.D * context.capacity / eps
    return {
        "replication": replication,
        "best_index": best,
        "best_value": context.values[best],
        "optimal": context.values[best] >= context.optimum - VALUE_TOL,
        "estimate": report.values[best],
        "max_value_error": float(errors.max()),
        "violations": report.violations,
        "iterations": report.iterations,
        "insertions": report.insertions,
        "iterations_within_bound": report.iterations <= bound,
    }


def _summarize_popler(records: List[Record]) -> Dict[str, Any]:
    return {
        "success_rate": _rate(records, "optimal"),
        "max_value_error": _max(records, "max_value_error"),
        "total_violations": int(sum(r["violations"] for r in records)),
        "max_iterations": int(_max(records, "iterations")),
        "iterations_within_bound_rate": _rate(records, "iterations_within_bound"),
    }


def _accept_popler(aggregate: Dict[str, Any], acceptance: Dict[str, Any]) -> List[str]:
    return (
        _at_least(aggregate, acceptance, "min_success_rate", "success_rate")
        + _at_most(aggregate, acceptance, "max_value_error", "max_value_error")
        + _at_most(aggregate, acceptance, "max_violations", "total_violations")
        + _at_least(aggregate, acceptance, "min_iterations_within_bound_rate", "iterations_within_bound_rate")
    )


# --- is-vs-trajtree ----------------------------------------------------------


def _prepare_baselines(config: ExperimentConfig) -> PlantedContext:
    access = str(config.instance.get("access", "generative"))
    if access != "generative":
        raise ValidationError(f"trajectory trees need a generative model, instance access is '{access}'")
    return _prepare_planted(config, need_cert=False)


def _replicate_baselines(context: PlantedContext, config: ExperimentConfig, replication: int) -> Record:
    algorithm = config.algorithm
    is_best, _ = importance_sampling(
        context.mdp, context.pclass, get_param(algorithm, "n_is", 2000, int), derive_rng(config.seed, 1, replication)
    )
    tree_best, tree_report = trajectory_tree(
        GenerativeOracle(context.mdp),
        context.pclass,
        get_param(algorithm, "n_trees", 2000, int),
        derive_rng(config.seed, 2, replication),
        keep_trees=context.mdp.is_deterministic(),
    )
    identical = None
    if tree_report.trees:
        identical = len({tree.topology() for tree in tree_report.trees}) == 1
    max_queries = max(tree_report.per_tree_queries)
    bound = context.mdp.horizon * context.capacity
    return {
        "replication": replication,
        "is_best": is_best,
        "is_optimal": context.values[is_best] >= context.optimum - VALUE_TOL,
        "trajtree_best": tree_best,
        "trajtree_optimal": context.values[tree_best] >= context.optimum - VALUE_TOL,
        "trajtree_queries": tree_report.query_count,
        "max_tree_queries": max_queries,
        "queries_within_bound": max_queries <= bound,
        "trees_identical": identical,
    }


def _summarize_baselines(records: List[Record]) -> Dict[str, Any]:
    return {
        "is_success_rate": _rate(records, "is_optimal"),
        "trajtree_success_rate": _rate(records, "trajtree_optimal"),
        "max_tree_queries": int(_max(records, "max_tree_queries")),
        "queries_within_bound_rate": _rate(records, "queries_within_bound"),
    }


def _accept_baselines(aggregate: Dict[str, Any], acceptance: Dict[str, Any]) -> List[str]:
    return (
        _at_least(aggregate, acceptance, "min_is_success_rate", "is_success_rate")
        + _at_least(aggregate, acceptance, "min_trajtree_success_rate", "trajtree_success_rate")
        + _at_least(aggregate, acceptance, "min_queries_within_bound_rate", "queries_within_bound_rate")
    )


# --- lowerbound-audit --------------------------------------------------------


def _prepare_lowerbound(config: ExperimentConfig) -> Dict[str, Any]:
    instance = config.instance
    context = {
        "eps": get_param(instance, "eps", 0.25, float),
        "ell": get_param(instance, "ell", 2, int),
        "H": get_param(instance, "H", 6, int),
        "J": get_param(instance, "J", 64, int),
    }
    if context["H"] < 2 or context["J"] < 1:
        raise ValidationError("lock instances need H >= 2 and J >= 1")
    return context


def _replicate_lowerbound(context: Dict[str, Any], config: ExperimentConfig, replication: int) -> Record:
    H, J = context["H"], context["J"]
    rng = derive_rng(config.seed, 1, replication)
    matrix = sample_blockfree_matrix(context["eps"], context["ell"], J, rng, max_retries=1, strict=False)
    pclass = build_pi_ell(matrix, H, J)
    audit = audit_pi_ell(matrix, pclass, J)
    pistar_index = int(rng.integers(len(pclass)))
    instance = build_hard_mdp(pclass, pistar_index, sample_decoder(J, H, rng), J, H)
    reference = build_reference_mdp(J, H)

    expected_star = BASE_REWARD + (GOOD_REWARD - BASE_REWARD) * len(instance.relevant) / J
    formula_error = dp_error = reference_error = 0.0
    for m, policy in enumerate(pclass):
        closed = exact_value_hard(instance, policy)
        target = expected_star if m == pistar_index else BASE_REWARD
        formula_error = max(formula_error, abs(closed - target))
        dp_error = max(dp_error, abs(closed - exact_policy_value(instance.mdp, policy)))
        reference_error = max(reference_error, abs(exact_policy_value(reference, policy) - BASE_REWARD))
    sampled = Policy(pclass.universe, rng.integers(0, 2, size=pclass.universe.state_count))
    reference_error = max(reference_error, abs(exact_policy_value(reference, sampled) - BASE_REWARD))

    props = matrix.properties()
    return {
        "replication": replication,
        "matrix_ok": props.ok,
        "rows_ok": props.rows_ok,
        "columns_ok": props.columns_ok,
        "blockfree_ok": props.blockfree_ok,
        "class_size": len(pclass),
        "relevant": len(instance.relevant),
        "structural_ok": audit.structural_ok,
        "formula_error": formula_error,
        "dp_error": dp_error,
        "reference_error": reference_error,
    }


def _summarize_lowerbound(records: List[Record]) -> Dict[str, Any]:
    return {
        "matrix_pass_rate": _rate(records, "matrix_ok"),
        "structural_rate": _rate(records, "structural_ok"),
        "max_formula_error": _max(records, "formula_error"),
        "max_dp_error": _max(records, "dp_error"),
        "max_reference_error": _max(records, "reference_error"),
    }


def _accept_lowerbound(aggregate: Dict[str, Any], acceptance: Dict[str, Any]) -> List[str]:
    return (
        _at_least(aggregate, acceptance, "min_structural_rate", "structural_rate")
        + _at_most(aggregate, acceptance, "value_tol", "max_formula_error")
        + _at_most(aggregate, acceptance, "value_tol", "max_dp_error")
        + _at_most(aggregate, acceptance, "value_tol", "max_reference_error")
        + _at_least(aggregate, acceptance, "min_matrix_pass_rate", "matrix_pass_rate")
    )


RECIPES: Dict[str, Recipe] = {
    recipe.name: recipe
    for recipe in (
        Recipe(
            "capacity-sweep",
            "Spanning capacity of a structured class while one parameter grows with the replication index",
            ("replication", "class", "size", "capacity", "expected", "matches", "exact", "nodes_expanded"),
            _prepare_sweep, _replicate_sweep, _summarize_sweep, _accept_sweep,
        ),
        Recipe(
            "coverability-check",
            "Coverability on random MDPs against the spanning capacity and its witness",
            ("replication", "coverability", "capacity", "dominated", "witness_coverability", "witness_tight"),
            _prepare_coverability, _replicate_coverability, _summarize_coverability, _accept_coverability,
        ),
        Recipe(
            "popler-e2e",
            "POPLER on a planted instance with exact values for comparison",
            ("replication", "best_index", "best_value", "optimal", "estimate", "max_value_error",
             "violations", "iterations", "insertions", "iterations_within_bound"),
            _prepare_popler, _replicate_popler, _summarize_popler, _accept_popler,
        ),
        Recipe(
            "is-vs-trajtree",
            "Uniform importance sampling against trajectory trees on the same instance",
            ("replication", "is_best", "is_optimal", "trajtree_best", "trajtree_optimal",
             "trajtree_queries", "max_tree_queries", "queries_within_bound", "trees_identical"),
            _prepare_baselines, _replicate_baselines, _summarize_baselines, _accept_baselines,
        ),
        Recipe(
            "lowerbound-audit",
            "Block-free matrix draws, Pi^(ell) structure and exact lock-instance values",
            ("replication", "matrix_ok", "rows_ok", "columns_ok", "blockfree_ok", "class_size", "relevant",
             "structural_ok", "formula_error", "dp_error", "reference_error"),
            _prepare_lowerbound, _replicate_lowerbound, _summarize_lowerbound, _accept_lowerbound,
        ),
    )
}


def get_recipe(name: str) -> Recipe:
    if name not in RECIPES:
        raise ValidationError(f"unknown recipe '{name}' (known: {', '.join(RECIPES)})")
    return RECIPES[name]
