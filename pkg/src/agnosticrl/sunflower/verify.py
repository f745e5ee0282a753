"""Exhaustive petal verification over state sequences of consecutive layers"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..core.errors import GuardExceeded, ValidationError
from ..mdp.model import StateId, Universe
from ..policies.policy import Policy, PolicyClass
from .cert import SunflowerCert

logger = logging.getLogger(__name__)

MAX_SEQUENCES = 10**7

Segment = Tuple[Tuple[StateId, int], ...]


@dataclass(frozen=True)
class PetalVerdict:
    """Outcome of checking one policy; witness is the first failing sequence"""

    ok: bool
    witness: Optional[Segment] = None

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "violation: " + " ".join(f"({s},{a})" for s, a in self.witness)


@dataclass(frozen=True)
class CertVerdict:
    ok: bool
    violations: Dict[int, Segment] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": {
                str(m): [[str(s), a] for s, a in seq] for m, seq in sorted(self.violations.items())
            },
        }


def sequence_count(universe: Universe, max_span: int) -> int:
    """Number of consecutive-layer state sequences with h' - h <= max_span"""
    sizes = universe.layer_sizes
    total = 0
    for start in range(len(sizes)):
        product = 1
        for end in range(start, min(start + max_span, len(sizes) - 1) + 1):
            product *= sizes[end]
            total += product
    return total


def _check_span(universe: Universe, max_span: int) -> None:
    if max_span < 0:
        raise ValidationError("max_span must be non-negative")
    count = sequence_count(universe, max_span)
    if count > MAX_SEQUENCES:
        raise GuardExceeded(f"petal verification would enumerate {count} sequences (limit {MAX_SEQUENCES})")


def _verify(policy: Policy, agree: np.ndarray, petal: Iterable[StateId], max_span: int) -> PetalVerdict:
    universe = policy.universe
    H = universe.horizon
    offsets = universe.offsets
    in_petal = np.zeros(universe.state_count, dtype=bool)
    for s in petal:
        in_petal[universe.flat(s)] = True

    def extend(prefix: List[Tuple[StateId, int]], alive: np.ndarray, last_layer: int, span_left: int):
        if span_left == 0 or last_layer == H:
            return None
        h = last_layer + 1
        for i in range(universe.size(h)):
            f = int(offsets[h - 1]) + i
            step = (StateId(h, i), int(policy.table[f]))
            if in_petal[f]:
                continue
            still = alive & agree[f]
            if not still.any():
                return tuple(prefix + [step])
            found = extend(prefix + [step], still, h, span_left - 1)
            if found is not None:
                return found
        return None

    for h in range(1, H + 1):
        for i in range(universe.size(h)):
            f = int(offsets[h - 1]) + i
            step = (StateId(h, i), int(policy.table[f]))
            alive = agree[f]
            if not alive.any():
                return PetalVerdict(False, (step,))
            found = extend([step], alive, h, max_span)
            if found is not None:
                return PetalVerdict(False, found)
    return PetalVerdict(True)


def verify_petal(policy: Policy, core: PolicyClass, s_pi: Iterable[StateId], max_span: int) -> PetalVerdict:
    """Check that every sequence consistent with policy either matches a core
    policy on the whole sequence or meets s_pi after its first state.

    Sequences run over consecutive layers h..h' with h' - h <= max_span and
    are enumerated in lexicographic order, prefixes first.

    Raises:
        ValidationError: If policy and core live on different universes
        GuardExceeded: If the enumeration would exceed MAX_SEQUENCES
    """
    if policy.universe != core.universe:
        raise ValidationError("policy and core live on different universes")
    _check_span(core.universe, max_span)
    agree = core.tables.T == policy.table[:, None]
    return _verify(policy, agree, s_pi, max_span)


def verify_cert(pclass: PolicyClass, cert: SunflowerCert, max_span: int) -> CertVerdict:
    """Verify every member's petal against the certificate core"""
    cert.require_covers(pclass)
    _check_span(pclass.universe, max_span)
    violations = {}
    for m, (policy, petal) in enumerate(zip(pclass, cert.petals)):
        agree = cert.core.tables.T == policy.table[:, None]
        verdict = _verify(policy, agree, petal, max_span)
        if not verdict.ok:
            logger.debug("member %d violates its petal: %s", m, verdict.describe())
            violations[m] = verdict.witness
    return CertVerdict(not violations, violations)
