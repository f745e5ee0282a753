"""Seeded generators of valid layered MDPs"""

from typing import Optional, Sequence

import numpy as np

from .model import LayeredMdp


def random_mdp(
    layer_sizes: Sequence[int],
    action_count: int,
    rng: np.random.Generator,
    deterministic: bool = False,
    reward_scale: Optional[float] = None,
    sparsity: float = 0.0,
) -> LayeredMdp:
    """Draw a random MDP whose trajectories collect at most 1 total reward.

    Args:
        layer_sizes: Number of states in each layer
        action_count: Number of actions
        rng: Random stream
        deterministic: Point-mass initial state and transitions
        reward_scale: Largest per-step mean reward (default 1/H)
        sparsity: Probability that a transition entry is zeroed before
            normalisation (one entry per row always survives)
    """
    H = len(layer_sizes)
    scale = 1.0 / H if reward_scale is None else reward_scale
    transitions = []
    for h in range(H - 1):
        shape = (layer_sizes[h], action_count, layer_sizes[h + 1])
        if deterministic:
            kernel = np.zeros(shape)
            targets = rng.integers(0, layer_sizes[h + 1], size=shape[:2])
            np.put_along_axis(kernel, targets[..., None], 1.0, axis=2)
        else:
            kernel = rng.dirichlet(np.ones(layer_sizes[h + 1]), size=shape[:2])
            if sparsity > 0:
                keep = rng.random(shape) >= sparsity
                keep[..., 0] |= ~keep.any(axis=2)
                kernel = kernel * keep
                kernel /= kernel.sum(axis=2, keepdims=True)
        transitions.append(kernel)
    rewards = [rng.random((n, action_count)) * scale for n in layer_sizes]
    if deterministic:
        init = np.zeros(layer_sizes[0])
        init[rng.integers(0, layer_sizes[0])] = 1.0
    else:
        init = rng.dirichlet(np.ones(layer_sizes[0]))
    return LayeredMdp(layer_sizes, action_count, transitions, rewards, init)


def chain_mdp(horizon: int, states_per_layer: int, action_count: int,
              reward: float = 0.0) -> LayeredMdp:
    """Deterministic chain: every action moves to state 0 of the next layer"""
    transitions = []
    for _ in range(horizon - 1):
        kernel = np.zeros((states_per_layer, action_count, states_per_layer))
        kernel[:, :, 0] = 1.0
        transitions.append(kernel)
    rewards = [np.full((states_per_layer, action_count), reward) for _ in range(horizon)]
    init = np.zeros(states_per_layer)
    init[0] = 1.0
    return LayeredMdp([states_per_layer] * horizon, action_count, transitions, rewards, init)


def binary_tree_mdp(horizon: int, reward: float = 0.0) -> LayeredMdp:
    """Deterministic full binary tree: action a from node i leads to node 2i + a"""
    sizes = [2 ** (h - 1) for h in range(1, horizon + 1)]
    transitions = []
    for h in range(1, horizon):
        kernel = np.zeros((sizes[h - 1], 2, sizes[h]))
        for i in range(sizes[h - 1]):
            for a in (0, 1):
                kernel[i, a, 2 * i + a] = 1.0
        transitions.append(kernel)
    rewards = [np.full((n, 2), reward) for n in sizes]
    return LayeredMdp(sizes, 2, transitions, rewards, np.ones(1))
