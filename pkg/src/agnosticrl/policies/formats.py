"""Text format for policy classes.

Header ``pclass K H A``; a ``layers : n1 n2 ...`` line when layer sizes are not
all K; a ``tag <name> [key=value ...]`` line; then, unless the tag names a
structured builder, one ``m : a(1,1) a(2,1) ... a(K,H)`` row per member in
layer-major order.
"""

from pathlib import Path
from typing import List, Union

import numpy as np

from ..core.errors import FormatError, ValidationError
from ..mdp.model import Universe
from .builders import CLASS_BUILDERS, build_class
from .policy import PolicyClass

PathLike = Union[str, Path]


def dumps_class(pclass: PolicyClass, explicit: bool = False) -> str:
    """Serialise a class; structured classes keep only their tag unless explicit is set"""
    u = pclass.universe
    out = [f"pclass {max(u.layer_sizes)} {u.horizon} {u.action_count}"]
    if not u.is_uniform:
        out.append("layers : " + " ".join(str(n) for n in u.layer_sizes))
    params = " ".join(f"{k}={v}" for k, v in pclass.params.items())
    out.append(f"tag {pclass.tag} {params}".rstrip())
    if explicit or pclass.tag not in CLASS_BUILDERS:
        out += ["m : " + " ".join(str(int(a)) for a in p.table) for p in pclass]
    return "\n".join(out) + "\n"


def loads_class(text: str) -> PolicyClass:
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or not lines[0].startswith("pclass"):
        raise FormatError("expected header 'pclass K H A'")
    header = lines[0].split()
    if len(header) != 4:
        raise FormatError("header must be 'pclass K H A'")
    try:
        K, H, A = (int(t) for t in header[1:])
    except ValueError:
        raise FormatError("header must be 'pclass K H A' with integers")
    sizes = [K] * H
    tag, params = "explicit", {}
    rows: List[List[int]] = []
    for number, line in enumerate(lines[1:], start=2):
        head, _, tail = line.partition(":")
        head = head.split()
        if not head:
            raise FormatError(f"line {number}: missing row kind before ':'")
        try:
            if head[0] == "layers":
                sizes = [int(t) for t in tail.split()]
            elif head[0] == "tag":
                tag = head[1] if len(head) > 1 else "explicit"
                params = {k: int(v) for k, v in (item.split("=", 1) for item in head[2:])}
            elif head[0] == "m":
                rows.append([int(t) for t in tail.split()])
            else:
                raise FormatError(f"line {number}: unknown row kind '{head[0]}'")
        except ValueError:
            raise FormatError(f"line {number}: malformed values")
    try:
        universe = Universe(tuple(sizes), A)
        if len(universe.layer_sizes) != H:
            raise FormatError(f"header declares {H} layers, the layers line lists {len(universe.layer_sizes)}")
        if not rows:
            if tag not in CLASS_BUILDERS:
                raise FormatError(f"class tagged '{tag}' lists no members")
            pclass = build_class(tag, params)
            if pclass.universe != universe:
                raise FormatError("structured class does not match the header universe")
            return pclass
        if len({len(row) for row in rows}) > 1:
            raise FormatError("member rows have different lengths")
        return PolicyClass.from_tables(universe, np.array(rows), tag, params)
    except ValidationError as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(str(e))


def read_class(path: PathLike) -> PolicyClass:
    try:
        return loads_class(Path(path).read_text())
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")


def write_class(pclass: PolicyClass, path: PathLike, explicit: bool = False) -> None:
    Path(path).write_text(dumps_class(pclass, explicit=explicit))
