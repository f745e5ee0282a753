"""Tests for policy-specific MRPs, the importance-weighted estimator and POPLER"""

from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agnosticrl.core.errors import GuardExceeded, ValidationError
from agnosticrl.core.seeding import derive_rng
from agnosticrl.mdp import (
    S_TOP,
    StateId,
    exact_policy_value,
    mrp_reach_prob,
    mrp_value,
    occupancy,
    random_mdp,
    s_bot,
)
from agnosticrl.policies import Policy, build_cb_chain, build_ltons, build_one_active, build_singletons
from agnosticrl.popler import (
    ReachedSet,
    build_empirical_mrp,
    data_collector,
    default_sample_sizes,
    estimate_edge,
    estimate_row,
    exact_policy_mrp,
    popler,
)
from agnosticrl.sunflower import build_cert
from oracles import avoid_set_reach

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestExactPolicyMrp:
    @given(seed=seeds)
    @settings(max_examples=50)
    def test_reach_probability_is_the_avoid_set_occupancy(self, seed):
        rng = np.random.default_rng(seed)
        mdp = random_mdp((2, 3, 2), 2, rng)
        policy = Policy(mdp.universe, rng.integers(0, 2, size=mdp.universe.state_count))
        states = list(mdp.universe.states())
        petal = [s for s in states if rng.random() < 0.5]
        reached = [s for s in petal if rng.random() < 0.5]
        mrp = exact_policy_mrp(mdp, policy, petal, reached)
        for target in petal:
            expected = avoid_set_reach(mdp, policy, petal, reached, target)
            assert mrp_reach_prob(mrp, target) == pytest.approx(expected, abs=1e-12)

    @given(seed=seeds)
    @settings(max_examples=50)
    def test_value_matches_when_every_petal_state_is_reached(self, seed):
        rng = np.random.default_rng(seed)
        mdp = random_mdp((3, 2, 2), 2, rng)
        policy = Policy(mdp.universe, rng.integers(0, 2, size=mdp.universe.state_count))
        petal = [s for s in mdp.universe.states() if rng.random() < 0.4]
        mrp = exact_policy_mrp(mdp, policy, petal, petal)
        assert mrp_value(mrp) == pytest.approx(exact_policy_value(mdp, policy), abs=1e-12)

    def test_unreached_states_end_the_episode(self, two_step_mdp):
        u = two_step_mdp.universe
        petal = [StateId(2, 1)]
        mrp = exact_policy_mrp(two_step_mdp, Policy.constant(u, 0), petal, [])
        assert mrp.prob(StateId(2, 1), s_bot(2)) == 1.0
        assert mrp.reward(StateId(2, 1), s_bot(2)) == 0.0
        # 0.5 * 0.1 into (2, 1), then nothing; 0.5 * (0.1 + 0.4) through (2, 0)
        assert mrp_value(mrp) == pytest.approx(0.3)

    def test_empty_petal_is_one_edge(self, two_step_mdp):
        mrp = exact_policy_mrp(two_step_mdp, Policy.constant(two_step_mdp.universe, 0), [], [])
        assert mrp.edges() == {(S_TOP, s_bot(2)): (pytest.approx(1.0), pytest.approx(0.55))}


def _unbiasedness_setup():
    mdp = random_mdp((2, 2, 2), 2, np.random.default_rng(99))
    pclass = build_ltons(2, 3, 2)
    cert = build_cert(pclass)
    anchor = StateId(2, 1)
    members = [m for m, p in enumerate(pclass) if anchor in cert.petals[m]][:3]
    members = list(dict.fromkeys(members + [0, 1, 4]))
    return mdp, pclass, cert, anchor, members


class TestEstimator:
    @pytest.mark.slow
    def test_importance_weighted_edges_are_unbiased(self):
        mdp, pclass, cert, anchor, members = _unbiasedness_setup()
        reacher = Policy.constant(mdp.universe, 0)
        draws = defaultdict(list)
        rng = np.random.default_rng(2023)
        for _ in range(200):
            top = data_collector(mdp, S_TOP, None, cert.core, 500, rng)
            through = data_collector(mdp, anchor, reacher, cert.core, 500, rng)
            for m in members:
                petal = cert.petals[m]
                for dataset in (top, through):
                    if dataset.anchor not in petal and dataset.anchor != S_TOP:
                        continue
                    row = estimate_row(dataset, cert.core, pclass[m], petal)
                    assert row.violations == 0
                    seen = set()
                    for target, (p, r) in row.edges.items():
                        draws[(m, dataset.anchor, target)].append((p, r))
                        seen.add(target)
                    for key in [k for k in draws if k[0] == m and k[1] == dataset.anchor and k[2] not in seen]:
                        draws[key].append((0.0, 0.0))

        checked = within = 0
        for (m, source, target), values in draws.items():
            mrp = exact_policy_mrp(mdp, pclass[m], cert.petals[m], [source] if source != S_TOP else [])
            p_exact = mrp.prob(source, target)
            joint_exact = p_exact * mrp.reward(source, target)
            # edges first seen late are padded with the zeros they missed
            values = [(0.0, 0.0)] * (200 - len(values)) + values
            sample = np.array(values)
            for column, exact in ((0, p_exact), (1, joint_exact)):
                se = sample[:, column].std(ddof=1) / np.sqrt(len(sample))
                checked += 1
                within += abs(sample[:, column].mean() - exact) <= 3 * se + 1e-9
        assert checked > 0
        assert within >= 0.95 * checked

    def test_empty_dataset_gives_zero(self, small_mdp, rng):
        pclass = build_singletons(2, 3)
        cert = build_cert(pclass)
        dataset = data_collector(small_mdp, S_TOP, None, cert.core, 0, rng)
        assert estimate_edge(dataset, cert.core, pclass[0], cert.petals[0], S_TOP, StateId(1, 0)) == (0.0, 0.0)

    def test_estimate_edge_checks_its_endpoints(self, small_mdp, rng):
        pclass = build_singletons(2, 3)
        cert = build_cert(pclass)
        dataset = data_collector(small_mdp, StateId(2, 0), pclass[0], cert.core, 20, rng)
        with pytest.raises(ValidationError):
            estimate_edge(dataset, cert.core, pclass[0], cert.petals[0], S_TOP, StateId(3, 0))
        with pytest.raises(ValidationError):
            estimate_edge(dataset, cert.core, pclass[0], cert.petals[0], StateId(2, 0), StateId(2, 1))

    def test_deterministic_instance_is_estimated_exactly(self, planted, rng):
        mdp, pclass = planted
        cert = build_cert(pclass)
        dataset = data_collector(mdp, S_TOP, None, cert.core, 3000, rng)
        # member 0 plays 1 on the start state, which every episode visits
        p, r = estimate_edge(dataset, cert.core, pclass[0], cert.petals[0], S_TOP, StateId(1, 0))
        assert (p, r) == (pytest.approx(1.0), pytest.approx(0.0))

    def test_empirical_mrp_needs_every_reached_dataset(self, small_mdp, rng):
        pclass = build_singletons(2, 3)
        cert = build_cert(pclass)
        datasets = {S_TOP: data_collector(small_mdp, S_TOP, None, cert.core, 10, rng)}
        with pytest.raises(ValidationError):
            build_empirical_mrp(datasets, cert.core, pclass[2], cert.petals[2], {S_TOP, StateId(2, 0)})


class TestCollector:
    def test_reacher_required_away_from_the_start(self, small_mdp, rng):
        core = build_cert(build_singletons(2, 3)).core
        with pytest.raises(ValidationError):
            data_collector(small_mdp, StateId(2, 0), None, core, 10, rng)
        with pytest.raises(ValidationError):
            data_collector(small_mdp, S_TOP, Policy.constant(small_mdp.universe), core, 10, rng)

    def test_only_trajectories_through_the_anchor_are_kept(self, small_mdp):
        core = build_cert(build_singletons(2, 3)).core
        n = 10_000
        rng = derive_rng(2024, 1)
        dataset = data_collector(small_mdp, StateId(2, 1), Policy.constant(small_mdp.universe, 1), core, n, rng)
        expected = small_mdp.init @ small_mdp.transition(1)[:, 1, 1]
        assert dataset.requested == n
        assert abs(dataset.accepted / n - expected) <= 3 * np.sqrt(expected * (1 - expected) / n) + 1e-9
        assert (dataset.batch.states[:, 1] == 1).all()
        assert (dataset.batch.actions[:, 0] == 1).all()

    def test_reached_set_rejects_repeats(self):
        reached = ReachedSet()
        reached.add(StateId(1, 0), None, 0)
        with pytest.raises(ValidationError):
            reached.add(StateId(1, 0), None, 1)
        assert reached.to_list() == [{"state": "0:0", "reacher": None}, {"state": "1:0", "reacher": 0}]


class TestSampleSizes:
    def test_small_case(self):
        assert default_sample_sizes(1, 0, 1, 0.5, 0.1) == (10, 1)

    def test_tighter_accuracy_needs_more_data(self):
        loose = default_sample_sizes(4, 1, 6, 0.2, 0.1)
        tight = default_sample_sizes(4, 1, 6, 0.1, 0.1)
        assert tight[0] > loose[0] and tight[1] > loose[1]

    @pytest.mark.parametrize("eps, delta", [(0.0, 0.1), (1.5, 0.1), (0.1, 0.0), (0.1, 1.0)])
    def test_rejects_bad_parameters(self, eps, delta):
        with pytest.raises(ValidationError):
            default_sample_sizes(2, 1, 4, eps, delta)


class TestPopler:
    @pytest.mark.slow
    def test_planted_instance(self, planted):
        mdp, pclass = planted
        cert = build_cert(pclass)
        exact = np.array([exact_policy_value(mdp, p) for p in pclass])
        successes = 0
        for seed in range(50):
            best, report = popler(mdp, pclass, cert, eps=0.1, delta=0.1, rng=np.random.default_rng(seed),
                                  n1=20000, n2=20000)
            successes += best == 3
            assert np.abs(np.array(report.values) - exact).max() <= 0.1
            assert report.violations == 0
            assert report.iteration_cap == 720
            assert report.iterations <= 720
        assert successes >= 45

    def test_single_run_identifies_the_planted_states(self, planted):
        mdp, pclass = planted
        best, report = popler(mdp, pclass, build_cert(pclass), eps=0.1, delta=0.1,
                              rng=np.random.default_rng(5), n1=20000, n2=20000)
        assert best == 3
        assert report.threshold == pytest.approx(0.1 / 6)
        assert report.insertions == len(report.reached) - 1
        assert {"state": "2:0", "reacher": 3} in report.reached
        assert report.values[3] == pytest.approx(0.815, abs=0.03)

    @pytest.mark.parametrize(
        "mdp, pclass, eps",
        [
            (None, None, 0.1),
            (random_mdp((2, 2, 2), 2, np.random.default_rng(3)), build_singletons(2, 3), 0.2),
        ],
        ids=["planted", "random"],
    )
    def test_identified_states_are_reachable_and_values_match(self, planted, mdp, pclass, eps):
        if mdp is None:
            mdp, pclass = planted
        cert = build_cert(pclass)
        _, report = popler(mdp, pclass, cert, eps=eps, delta=0.1, rng=derive_rng(17, 3), n1=20000, n2=20000)
        floor = eps / (12 * cert.D)
        reached = [StateId.parse(entry["state"]) for entry in report.reached]
        for entry, state in zip(report.reached[1:], reached[1:]):
            assert occupancy(mdp, pclass[entry["reacher"]]).state(state) >= floor
        for m, estimate in enumerate(report.values):
            exact = exact_policy_mrp(mdp, pclass[m], cert.petals[m], [s for s in reached if s in cert.petals[m]])
            assert abs(estimate - mrp_value(exact)) <= eps

    def test_zero_petals_skip_identification(self):
        mdp = random_mdp((1, 1), 2, np.random.default_rng(11))
        pclass = build_cb_chain(2, 2, K=1)
        best, report = popler(mdp, pclass, build_cert(pclass), eps=0.1, delta=0.1,
                              rng=np.random.default_rng(1), n1=20000, n2=1)
        exact = [exact_policy_value(mdp, p) for p in pclass]
        assert report.iterations == 0
        assert report.threshold is None
        assert report.reached == [{"state": "0:0", "reacher": None}]
        np.testing.assert_allclose(report.values, exact, atol=0.05)

    def test_iteration_cap_uses_the_universe_capacity(self):
        mdp = random_mdp((3, 3, 3), 2, np.random.default_rng(8))
        pclass = build_one_active(3, 3)
        cert = build_cert(pclass)
        _, report = popler(mdp, pclass, cert, eps=0.5, delta=0.1, rng=derive_rng(4), n1=200, n2=200)
        # capacity 4 on three states per layer
        assert report.iteration_cap == 288 * cert.D

    def test_iteration_guard(self, planted):
        mdp, pclass = planted
        with pytest.raises(GuardExceeded):
            popler(mdp, pclass, build_cert(pclass), eps=0.1, delta=0.1, rng=np.random.default_rng(0),
                   n1=100, n2=100, capacity_bound=0)

    def test_rejects_uncovered_class(self, planted):
        mdp, pclass = planted
        with pytest.raises(ValidationError):
            popler(mdp, pclass, build_cert(build_singletons(2, 2)), eps=0.1, delta=0.1,
                   rng=np.random.default_rng(0), n1=10, n2=10)
