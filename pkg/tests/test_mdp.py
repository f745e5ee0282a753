"""Tests for layered MDPs, exact evaluation, sampling and MRPs"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agnosticrl.core.errors import FormatError, ValidationError
from agnosticrl.mdp import (
    S_TOP,
    LayeredMdp,
    Mrp,
    StateId,
    Universe,
    chain_mdp,
    dumps_mdp,
    dumps_mrp,
    exact_policy_value,
    layered_mrp,
    loads_mdp,
    loads_mrp,
    mrp_occupancy,
    mrp_reach_prob,
    mrp_value,
    occupancy,
    random_mdp,
    read_mrp,
    s_bot,
    sample_trajectories,
    sample_trajectory,
    simulation_gap_bound,
    state_values,
    write_mrp,
)
from agnosticrl.policies import Policy
from oracles import enumerated_value

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestUniverse:
    def test_offsets_and_flat(self):
        u = Universe((2, 3, 1), 2)
        assert u.horizon == 3
        assert u.state_count == 6
        assert list(u.offsets) == [0, 2, 5]
        assert u.flat(StateId(2, 1)) == 3
        assert list(u.layer_of_flat()) == [1, 1, 2, 2, 2, 3]

    def test_rejects_states_outside(self):
        with pytest.raises(ValidationError):
            Universe((2, 2), 2).flat(StateId(3, 0))

    def test_state_id_text(self):
        assert str(StateId(4, 2)) == "4:2"
        assert StateId.parse("4:2") == StateId(4, 2)


class TestLayeredMdp:
    def test_rejects_rows_not_summing_to_one(self):
        kernel = np.array([[[0.5, 0.4]]])
        with pytest.raises(ValidationError):
            LayeredMdp((1, 2), 1, [kernel], [np.zeros((1, 1)), np.zeros((2, 1))], np.ones(1))

    def test_renormalises_within_tolerance(self):
        kernel = np.array([[[0.5, 0.5 + 1e-12]]])
        mdp = LayeredMdp((1, 2), 1, [kernel], [np.zeros((1, 1)), np.zeros((2, 1))], np.ones(1))
        assert mdp.transition(1).sum() == pytest.approx(1.0, abs=1e-15)

    def test_rejects_paths_paying_more_than_one(self):
        with pytest.raises(ValidationError):
            chain_mdp(3, 1, 1, reward=0.5)

    def test_arrays_are_read_only(self, two_step_mdp):
        with pytest.raises(ValueError):
            two_step_mdp.transition(1)[0, 0, 0] = 0.0

    def test_is_deterministic(self, two_step_mdp):
        assert chain_mdp(3, 2, 2).is_deterministic()
        assert not two_step_mdp.is_deterministic()


class TestExactEvaluation:
    def test_hand_computed_values(self, two_step_mdp):
        u = two_step_mdp.universe
        assert exact_policy_value(two_step_mdp, Policy.constant(u, 0)) == pytest.approx(0.55)
        assert exact_policy_value(two_step_mdp, Policy.constant(u, 1)) == pytest.approx(0.2)

    def test_state_values_per_layer(self, two_step_mdp):
        values = state_values(two_step_mdp, Policy.constant(two_step_mdp.universe, 0))
        np.testing.assert_allclose(values[1], [0.4, 0.5])
        np.testing.assert_allclose(values[0], [0.55, 0.8])

    def test_occupancy_hand_computed(self, two_step_mdp):
        table = occupancy(two_step_mdp, Policy.constant(two_step_mdp.universe, 0))
        np.testing.assert_allclose(table.states[1], [0.5, 0.5])
        assert table.pair(StateId(2, 1), 0) == pytest.approx(0.5)
        assert table.pair(StateId(2, 1), 1) == 0.0

    @given(seed=seeds, stochastic=st.booleans())
    @settings(max_examples=40)
    def test_dp_matches_path_enumeration(self, seed, stochastic):
        rng = np.random.default_rng(seed)
        mdp = random_mdp((2, 3, 2), 2, rng, deterministic=not stochastic)
        policy = Policy(mdp.universe, rng.integers(0, 2, size=mdp.universe.state_count))
        assert exact_policy_value(mdp, policy) == pytest.approx(enumerated_value(mdp, policy), abs=1e-12)

    @given(seed=seeds)
    @settings(max_examples=30)
    def test_occupancy_layers_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        mdp = random_mdp((3, 2, 4, 1), 3, rng, sparsity=0.5)
        policy = Policy(mdp.universe, rng.integers(0, 3, size=mdp.universe.state_count))
        np.testing.assert_allclose(occupancy(mdp, policy).layer_sums(), 1.0, atol=1e-12)

    def test_rejects_foreign_policy(self, two_step_mdp):
        with pytest.raises(ValidationError):
            exact_policy_value(two_step_mdp, Policy.constant(Universe((2, 2, 2), 2)))


class TestSampling:
    def test_same_seed_same_batch(self, small_mdp):
        policy = Policy.constant(small_mdp.universe, 1)
        a = sample_trajectories(small_mdp, policy, 50, np.random.default_rng(3))
        b = sample_trajectories(small_mdp, policy, 50, np.random.default_rng(3))
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.rewards, b.rewards)

    def test_trajectory_follows_policy(self, small_mdp, rng):
        policy = Policy(small_mdp.universe, [0, 1, 1, 0, 1, 1])
        tau = sample_trajectory(small_mdp, policy, rng)
        assert tau.horizon == 3
        for state, action, _ in tau.steps():
            assert policy.action(state) == action

    def test_monte_carlo_matches_exact_value(self, small_mdp, rng):
        policy = Policy.constant(small_mdp.universe, 0)
        batch = sample_trajectories(small_mdp, policy, 40000, rng)
        returns = batch.rewards.sum(axis=1)
        se = returns.std() / np.sqrt(len(returns))
        assert abs(returns.mean() - exact_policy_value(small_mdp, policy)) <= 4 * se + 1e-12

    def test_deterministic_chain_is_exact(self, rng):
        mdp = chain_mdp(4, 2, 2, reward=0.25)
        batch = sample_trajectories(mdp, Policy.constant(mdp.universe, 1), 10, rng)
        np.testing.assert_allclose(batch.rewards.sum(axis=1), 1.0)
        assert (batch.states[:, 1:] == 0).all()


class TestFormats:
    def test_mdp_text_preserves_values(self, small_mdp):
        loaded = loads_mdp(dumps_mdp(small_mdp))
        policy = Policy.constant(small_mdp.universe, 1)
        assert loaded.universe == small_mdp.universe
        assert exact_policy_value(loaded, policy) == pytest.approx(exact_policy_value(small_mdp, policy), abs=1e-14)
        np.testing.assert_allclose(loaded.transition(2), small_mdp.transition(2), atol=1e-15)

    def test_mrp_file(self, tmp_path):
        mrp = layered_mrp(1, {S_TOP: {StateId(1, 0): (1.0, 0.2)}, StateId(1, 0): {s_bot(1): (1.0, 0.3)}})
        path = tmp_path / "policy.mrp"
        write_mrp(mrp, path)
        assert mrp_value(read_mrp(path)) == pytest.approx(0.5)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            read_mrp(tmp_path / "gone.mrp")

    def test_mrp_text_preserves_edges(self):
        mrp = layered_mrp(2, {S_TOP: {StateId(1, 0): (0.25, 0.1), s_bot(2): (0.75, 0.0)},
                              StateId(1, 0): {s_bot(2): (1.0, 0.5)}})
        assert loads_mrp(dumps_mrp(mrp)).edges() == mrp.edges()

    @pytest.mark.parametrize("text", ["", "mdp 2", "mdp 1 1\nlayer 1 1\nr 1 0 0 : sideways 0.1\ninit : 1"])
    def test_malformed_mdp_text(self, text):
        with pytest.raises(FormatError):
            loads_mdp(text)

    @pytest.mark.parametrize(
        "text",
        [
            "mdp 1 2\nlayer 1 1\n: 1",
            "mdp 1 2\nlayer 1 1\nr 1 -1 0 : point 0.5\ninit : 1",
            "mdp 1 2\nlayer 1 1\nr 1 0 -1 : point 0.5\ninit : 1",
            "mdp 2 1\nlayer 1 1\nlayer 2 2\nt 1 0 0 : 0.5 0.5\nt 2 0 0 : 1\ninit : 1",
            "mdp 0 2\ninit : 1",
            "mdp 1 2\nlayer 1 0\ninit : 1",
        ],
        ids=["empty-kind", "negative-state", "negative-action", "last-layer-transition", "no-layers", "empty-layer"],
    )
    def test_out_of_range_mdp_rows(self, text):
        with pytest.raises(FormatError):
            loads_mdp(text)

    @pytest.mark.parametrize("text", ["mrp 1\nflavor", "mrp 1\nflavor sideways", "mrp 1\n: 1", "mrp 1\nflavor empirical x"])
    def test_malformed_mrp_text(self, text):
        with pytest.raises(FormatError):
            loads_mrp(text)


def _random_mrp_pair(seed: int, H: int):
    """An exact MRP and a substochastic perturbation whose edge rewards stay at most 1/(H+1)"""
    rng = np.random.default_rng(seed)
    cap = 1.0 / (H + 1)
    layers = [[StateId(h, i) for i in range(int(rng.integers(1, 3)))] for h in range(1, H + 1)]
    sources = [S_TOP] + [s for layer in layers for s in layer]
    exact, perturbed = {}, {}
    for src in sources:
        targets = [s for layer in layers[src.layer:] for s in layer] + [s_bot(H)]
        probs = rng.dirichlet(np.ones(len(targets)))
        exact[src] = {t: (p, rng.uniform(0, cap)) for t, p in zip(targets, probs)}
        perturbed[src] = {t: (p * rng.uniform(0.5, 1.0), rng.uniform(0, cap)) for t, p in zip(targets, probs)}
    return layered_mrp(H, exact), layered_mrp(H, perturbed, exact=False)


class TestMrp:
    def test_value_of_hand_built_mrp(self):
        a, b = StateId(1, 0), StateId(2, 0)
        mrp = layered_mrp(2, {S_TOP: {a: (0.5, 0.0), b: (0.5, 0.2)}, a: {b: (1.0, 0.4)}, b: {s_bot(2): (1.0, 0.3)}})
        # 0.5 * (0.4 + 0.3) + 0.5 * (0.2 + 0.3)
        assert mrp_value(mrp) == pytest.approx(0.6)
        assert mrp_reach_prob(mrp, a) == pytest.approx(0.5)
        assert mrp_reach_prob(mrp, b) == pytest.approx(1.0)
        d = mrp_occupancy(mrp)
        assert d[mrp.index(b)] == pytest.approx(1.0)

    def test_rejects_backward_edges(self):
        with pytest.raises(ValidationError):
            Mrp(2, [StateId(2, 0), StateId(1, 0)], {(StateId(2, 0), StateId(1, 0)): (1.0, 0.0)})

    def test_exact_rows_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            layered_mrp(1, {S_TOP: {s_bot(1): (0.5, 0.0)}})
        layered_mrp(1, {S_TOP: {s_bot(1): (0.5, 0.0)}}, exact=False)

    def test_unreachable_nodes_do_not_change_value(self):
        base = {S_TOP: {StateId(1, 0): (1.0, 0.1)}, StateId(1, 0): {s_bot(1): (1.0, 0.2)}}
        extra = dict(base)
        extra[StateId(1, 1)] = {s_bot(1): (1.0, 0.9)}
        assert mrp_value(layered_mrp(1, base)) == pytest.approx(mrp_value(layered_mrp(1, extra)))
        assert mrp_reach_prob(layered_mrp(1, extra), StateId(1, 1)) == 0.0

    @given(seed=seeds, H=st.integers(min_value=1, max_value=4))
    @settings(max_examples=1000)
    def test_simulation_gap_is_bounded(self, seed, H):
        exact, perturbed = _random_mrp_pair(seed, H)
        gap, bound = simulation_gap_bound(exact, perturbed)
        assert gap <= bound + 1e-12

    def test_identical_mrps_have_zero_bound(self):
        exact, _ = _random_mrp_pair(5, 3)
        assert simulation_gap_bound(exact, exact) == (0.0, 0.0)
