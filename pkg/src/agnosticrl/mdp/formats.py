"""Line-oriented text formats for MDPs and MRPs.

MDP files::

    mdp H A
    layer h n            (one per layer)
    t h s a : p1 p2 ...  (transition row over layer h+1)
    r h s a : kind value (kind is point or bernoulli)
    init : p1 p2 ...

MRP files use the header ``mrp H``, optional ``flavor empirical K``, one
``node h s`` line per node and ``e h s h' s' : p r`` edge rows. Blank lines and
lines starting with ``#`` are ignored. Indices are 0-based within a layer.
"""

from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import FormatError, ValidationError
from .model import LayeredMdp, StateId
from .mrp import Mrp

PathLike = Union[str, Path]


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _lines(text: str) -> Iterator[Tuple[int, List[str], List[str]]]:
    """Yield (line number, head tokens, tail tokens) split on ':'"""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition(":")
        if not head.split():
            raise FormatError(f"line {number}: missing row kind before ':'")
        yield number, head.split(), tail.split() if sep else []


def _ints(tokens: List[str], number: int, count: Optional[int] = None) -> List[int]:
    if count is not None and len(tokens) != count:
        raise FormatError(f"line {number}: expected {count} integers, got {len(tokens)}")
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"line {number}: expected integers, got {' '.join(tokens)}")


def _floats(tokens: List[str], number: int, count: Optional[int] = None) -> List[float]:
    if count is not None and len(tokens) != count:
        raise FormatError(f"line {number}: expected {count} numbers, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise FormatError(f"line {number}: expected numbers, got {' '.join(tokens)}")


def dumps_mdp(mdp: LayeredMdp) -> str:
    H, A = mdp.horizon, mdp.action_count
    out = [f"mdp {H} {A}"]
    out += [f"layer {h} {mdp.universe.size(h)}" for h in range(1, H + 1)]
    for h in range(1, H):
        kernel = mdp.transition(h)
        for s in range(kernel.shape[0]):
            for a in range(A):
                out.append(f"t {h} {s} {a} : " + " ".join(fmt(p) for p in kernel[s, a]))
    for h in range(1, H + 1):
        means, flags = mdp.reward_mean(h), mdp.is_bernoulli(h)
        for s in range(means.shape[0]):
            for a in range(A):
                kind = "bernoulli" if flags[s, a] else "point"
                out.append(f"r {h} {s} {a} : {kind} {fmt(means[s, a])}")
    out.append("init : " + " ".join(fmt(p) for p in mdp.init))
    return "\n".join(out) + "\n"


def loads_mdp(text: str) -> LayeredMdp:
    rows = iter(_lines(text))
    try:
        number, head, _ = next(rows)
    except StopIteration:
        raise FormatError("empty MDP file")
    if len(head) != 3 or head[0] != "mdp":
        raise FormatError(f"line {number}: expected header 'mdp H A'")
    H, A = _ints(head[1:], number)
    if H < 1 or A < 1:
        raise FormatError(f"line {number}: horizon and action count must be positive")
    sizes: Dict[int, int] = {}
    transitions: Dict[int, np.ndarray] = {}
    rewards: Dict[int, np.ndarray] = {}
    flags: Dict[int, np.ndarray] = {}
    init = None

    def layer_size(h: int, number: int) -> int:
        if h not in sizes:
            raise FormatError(f"line {number}: layer {h} used before its 'layer' line")
        return sizes[h]

    def check_pair(h: int, s: int, a: int, number: int) -> None:
        if not 0 <= s < layer_size(h, number):
            raise FormatError(f"line {number}: state {s} is outside layer {h}")
        if not 0 <= a < A:
            raise FormatError(f"line {number}: action {a} is outside 0..{A - 1}")

    for number, head, tail in rows:
        kind = head[0]
        if kind == "layer":
            h, n = _ints(head[1:], number, 2)
            if not 1 <= h <= H or n < 1:
                raise FormatError(f"line {number}: bad layer line 'layer {h} {n}'")
            sizes[h] = n
        elif kind == "t":
            h, s, a = _ints(head[1:], number, 3)
            if not 1 <= h < H:
                raise FormatError(f"line {number}: layer {h} has no outgoing transitions")
            check_pair(h, s, a, number)
            if h not in transitions:
                transitions[h] = np.zeros((layer_size(h, number), A, layer_size(h + 1, number)))
            probs = _floats(tail, number)
            if len(probs) != transitions[h].shape[2]:
                raise FormatError(f"line {number}: expected {transitions[h].shape[2]} probabilities")
            transitions[h][s, a] = probs
        elif kind == "r":
            h, s, a = _ints(head[1:], number, 3)
            check_pair(h, s, a, number)
            if h not in rewards:
                rewards[h] = np.zeros((layer_size(h, number), A))
                flags[h] = np.zeros((layer_size(h, number), A), dtype=bool)
            if len(tail) != 2 or tail[0] not in ("point", "bernoulli"):
                raise FormatError(f"line {number}: expected 'point v' or 'bernoulli p'")
            rewards[h][s, a] = _floats(tail[1:], number)[0]
            flags[h][s, a] = tail[0] == "bernoulli"
        elif kind == "init":
            init = np.array(_floats(tail, number))
        else:
            raise FormatError(f"line {number}: unknown row kind '{kind}'")

    if sorted(sizes) != list(range(1, H + 1)):
        raise FormatError(f"expected 'layer' lines for layers 1..{H}")
    if init is None:
        raise FormatError("missing 'init' row")
    layer_sizes = [sizes[h] for h in range(1, H + 1)]
    try:
        return LayeredMdp(
            layer_sizes,
            A,
            [transitions.get(h, np.zeros((sizes[h], A, sizes[h + 1]))) for h in range(1, H)],
            [rewards.get(h, np.zeros((sizes[h], A))) for h in range(1, H + 1)],
            init,
            bernoulli=[flags.get(h, np.zeros((sizes[h], A), dtype=bool)) for h in range(1, H + 1)],
        )
    except ValidationError as e:
        raise FormatError(str(e))


def dumps_mrp(mrp: Mrp) -> str:
    out = [f"mrp {mrp.horizon}"]
    if not mrp.exact:
        out.append(f"flavor empirical {fmt(mrp.bound)}")
    out += [f"node {n.layer} {n.index}" for n in mrp.nodes]
    for (src, dst), (p, r) in sorted(mrp.edges().items()):
        out.append(f"e {src.layer} {src.index} {dst.layer} {dst.index} : {fmt(p)} {fmt(r)}")
    return "\n".join(out) + "\n"


def loads_mrp(text: str) -> Mrp:
    rows = iter(_lines(text))
    try:
        number, head, _ = next(rows)
    except StopIteration:
        raise FormatError("empty MRP file")
    if len(head) != 2 or head[0] != "mrp":
        raise FormatError(f"line {number}: expected header 'mrp H'")
    H = _ints(head[1:], number)[0]
    exact, bound = True, 1.0
    nodes, edges = [], {}
    for number, head, tail in rows:
        if head[0] == "flavor":
            if len(head) < 2 or head[1] not in ("exact", "empirical"):
                raise FormatError(f"line {number}: expected 'flavor exact' or 'flavor empirical B'")
            exact = head[1] == "exact"
            if len(head) > 2:
                bound = _floats(head[2:], number, 1)[0]
        elif head[0] == "node":
            h, s = _ints(head[1:], number, 2)
            nodes.append(StateId(h, s))
        elif head[0] == "e":
            h, s, h2, s2 = _ints(head[1:], number, 4)
            p, r = _floats(tail, number, 2)
            edges[(StateId(h, s), StateId(h2, s2))] = (p, r)
        else:
            raise FormatError(f"line {number}: unknown row kind '{head[0]}'")
    try:
        return Mrp(H, nodes, edges, exact=exact, bound=bound)
    except ValidationError as e:
        raise FormatError(str(e))


def read_mdp(path: PathLike) -> LayeredMdp:
    try:
        return loads_mdp(Path(path).read_text())
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")


def write_mdp(mdp: LayeredMdp, path: PathLike) -> None:
    Path(path).write_text(dumps_mdp(mdp))


def read_mrp(path: PathLike) -> Mrp:
    try:
        return loads_mrp(Path(path).read_text())
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")


def write_mrp(mrp: Mrp, path: PathLike) -> None:
    Path(path).write_text(dumps_mrp(mrp))
