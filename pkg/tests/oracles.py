"""Brute-force oracles that share no code paths with the library"""

import itertools
from typing import Iterable, Iterator, List, Tuple

from agnosticrl.mdp import LayeredMdp, StateId
from agnosticrl.policies import Policy, PolicyClass


def enumerate_paths(mdp: LayeredMdp, policy: Policy) -> Iterator[Tuple[float, Tuple[int, ...], float]]:
    """Every positive-probability state path with its probability and summed mean reward"""
    H = mdp.horizon

    def walk(h: int, state: int, prob: float, states: List[int], reward: float):
        action = policy.action(StateId(h, state))
        reward += mdp.reward_mean(h)[state, action]
        states = states + [state]
        if h == H:
            yield prob, tuple(states), reward
            return
        for nxt, p in enumerate(mdp.transition(h)[state, action]):
            if p > 0:
                yield from walk(h + 1, nxt, prob * p, states, reward)

    for s0, p0 in enumerate(mdp.init):
        if p0 > 0:
            yield from walk(1, s0, p0, [], 0.0)


def enumerated_value(mdp: LayeredMdp, policy: Policy) -> float:
    return sum(p * r for p, _, r in enumerate_paths(mdp, policy))


def avoid_set_reach(mdp: LayeredMdp, policy: Policy, petal: Iterable[StateId],
                    reached: Iterable[StateId], target: StateId) -> float:
    """P(path visits target and every petal state before it is in reached)"""
    petal, reached = set(petal), set(reached)
    total = 0.0
    for prob, states, _ in enumerate_paths(mdp, policy):
        for h, index in enumerate(states, start=1):
            state = StateId(h, index)
            if state == target:
                total += prob
                break
            if state in petal and state not in reached:
                break
    return total


def markov_capacity(pclass: PolicyClass) -> int:
    """Capacity by enumerating every successor choice of the (state, action)
    pairs the class reaches, one layer at a time"""
    u = pclass.universe
    H = u.horizon
    best = 0

    def walk(t: int, positions: List[int]) -> None:
        nonlocal best
        played = [policy.action(StateId(t, s)) for policy, s in zip(pclass, positions)]
        pairs = sorted(set(zip(positions, played)))
        best = max(best, len(pairs))
        if t == H:
            return
        for successors in itertools.product(range(u.size(t + 1)), repeat=len(pairs)):
            step = dict(zip(pairs, successors))
            walk(t + 1, [step[pair] for pair in zip(positions, played)])

    for s0 in range(u.size(1)):
        walk(1, [s0] * len(pclass))
    return best


def brute_force_petal(policy: Policy, core: PolicyClass, petal: Iterable[StateId], max_span: int) -> bool:
    """Every consecutive-layer sequence consistent with policy either avoids the
    petal after its first state and matches a core policy, or meets the petal"""
    u = policy.universe
    petal = set(petal)
    for h in range(1, u.horizon + 1):
        for end in range(h, min(u.horizon, h + max_span) + 1):
            for indices in itertools.product(*[range(u.size(l)) for l in range(h, end + 1)]):
                states = [StateId(h + k, i) for k, i in enumerate(indices)]
                if any(s in petal for s in states[1:]):
                    continue
                steps = [(s, policy.action(s)) for s in states]
                if not any(all(c.action(s) == a for s, a in steps) for c in core):
                    return False
    return True
