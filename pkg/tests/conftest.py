"""Shared fixtures for the agnosticrl test suite"""

import numpy as np
import pytest
from hypothesis import settings

from agnosticrl.harness.recipes import planted_singleton_mdp
from agnosticrl.mdp import LayeredMdp, random_mdp
from agnosticrl.policies import build_singletons

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def planted():
    """The two-layer singleton instance whose unique optimum is member 3"""
    return planted_singleton_mdp(), build_singletons(3, 2)


@pytest.fixture
def small_mdp() -> LayeredMdp:
    return random_mdp((2, 2, 2), 2, np.random.default_rng(7))


@pytest.fixture
def two_step_mdp() -> LayeredMdp:
    """Hand-built MDP with two states per layer and known values"""
    transitions = [
        np.array(
            [
                [[0.5, 0.5], [1.0, 0.0]],
                [[0.0, 1.0], [0.25, 0.75]],
            ]
        )
    ]
    rewards = [np.array([[0.1, 0.2], [0.3, 0.0]]), np.array([[0.4, 0.0], [0.5, 0.6]])]
    return LayeredMdp((2, 2), 2, transitions, rewards, np.array([1.0, 0.0]))
