"""(K, D)-sunflower certificates and their constructive builders"""

from dataclasses import dataclass
from typing import FrozenSet, Tuple

from ..core.errors import ValidationError
from ..mdp.model import StateId
from ..policies.builders import build_constant, build_layer_indicator
from ..policies.policy import PolicyClass


@dataclass(frozen=True)
class SunflowerCert:
    """Core policies plus one petal state set per class member"""

    core: PolicyClass
    petals: Tuple[FrozenSet[StateId], ...]
    K: int
    D: int

    def __post_init__(self):
        if len(self.core) > self.K:
            raise ValidationError(f"core has {len(self.core)} policies, certificate allows {self.K}")
        for m, petal in enumerate(self.petals):
            if len(petal) > self.D:
                raise ValidationError(f"petal of member {m} has {len(petal)} states, certificate allows {self.D}")
            for state in petal:
                if not self.core.universe.contains(state):
                    raise ValidationError(f"petal state {state} of member {m} is outside the universe")
        object.__setattr__(self, "petals", tuple(frozenset(p) for p in self.petals))

    def covers(self, pclass: PolicyClass) -> bool:
        return pclass.universe == self.core.universe and len(self.petals) == len(pclass)

    def require_covers(self, pclass: PolicyClass) -> None:
        if not self.covers(pclass):
            raise ValidationError(
                f"certificate has {len(self.petals)} petals for a class of {len(pclass)} members"
                " or a different universe"
            )

    def petal_states(self):
        """Union of all petals in sorted order"""
        return sorted(set().union(*self.petals)) if self.petals else []


def build_cert(pclass: PolicyClass) -> SunflowerCert:
    """Certificate for a structured class, chosen by its tag.

    Raises:
        ValidationError: If the class tag has no constructive certificate
    """
    universe = pclass.universe
    H = universe.horizon
    tag = pclass.tag
    if tag in ("singleton", "lton"):
        ell = pclass.params.get("ell", 1)
        petals = [frozenset(p.support()) for p in pclass]
        return SunflowerCert(build_layer_indicator(universe), tuple(petals), H + 1, ell)
    if tag in ("one_active", "all_active"):
        petals = []
        for p in pclass:
            support = p.support()
            column = support[0].index if support else 0
            petals.append(frozenset(s for s in universe.states() if s.index == column))
        return SunflowerCert(build_layer_indicator(universe), tuple(petals), H + 1, H)
    if tag == "tabular":
        everything = frozenset(universe.states())
        return SunflowerCert(build_constant(universe), tuple(everything for _ in pclass),
                             universe.action_count, universe.state_count)
    if tag == "cb_chain":
        core = PolicyClass(universe, pclass.members)
        return SunflowerCert(core, tuple(frozenset() for _ in pclass), len(pclass), 0)
    if tag == "tree_paths":
        petals = [frozenset(_tree_path(p)) for p in pclass]
        return SunflowerCert(build_layer_indicator(universe), tuple(petals), H + 1, H)
    raise ValidationError(f"no constructive certificate for class tag '{tag}'; supply one explicitly")


def _tree_path(policy) -> Tuple[StateId, ...]:
    """States a tree-path policy visits when it follows its own actions"""
    path, index = [], 0
    for h in range(1, policy.universe.horizon + 1):
        state = StateId(h, index)
        path.append(state)
        index = 2 * index + policy.action(state)
    return tuple(path)
