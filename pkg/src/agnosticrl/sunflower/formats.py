"""Text format for sunflower certificates.

``cert K D``, ``universe : A n1 n2 ...``, one ``core : a a a ...`` row per core
policy (layer-major actions) and one ``petal m : h:i h:i ...`` row per class
member.
"""

from pathlib import Path
from typing import Union

import numpy as np

from ..core.errors import FormatError, ValidationError
from ..mdp.model import StateId, Universe
from ..policies.policy import PolicyClass
from .cert import SunflowerCert

PathLike = Union[str, Path]


def dumps_cert(cert: SunflowerCert) -> str:
    u = cert.core.universe
    out = [f"cert {cert.K} {cert.D}", f"universe : {u.action_count} " + " ".join(str(n) for n in u.layer_sizes)]
    out += ["core : " + " ".join(str(int(a)) for a in p.table) for p in cert.core]
    for m, petal in enumerate(cert.petals):
        out.append(f"petal {m} : " + " ".join(str(s) for s in sorted(petal)))
    return "\n".join(line.rstrip() for line in out) + "\n"


def loads_cert(text: str) -> SunflowerCert:
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines or not lines[0].startswith("cert"):
        raise FormatError("expected header 'cert K D'")
    try:
        K, D = (int(t) for t in lines[0].split()[1:3])
        universe = None
        core_rows, petals = [], {}
        for line in lines[1:]:
            head, _, tail = line.partition(":")
            head = head.split()
            if head[0] == "universe":
                values = [int(t) for t in tail.split()]
                universe = Universe(tuple(values[1:]), values[0])
            elif head[0] == "core":
                core_rows.append([int(t) for t in tail.split()])
            elif head[0] == "petal":
                petals[int(head[1])] = frozenset(StateId.parse(t) for t in tail.split())
            else:
                raise FormatError(f"unknown row kind '{head[0]}'")
    except ValueError as e:
        raise FormatError(f"malformed certificate: {e}")
    if universe is None:
        raise FormatError("missing 'universe' row")
    if sorted(petals) != list(range(len(petals))):
        raise FormatError("petal rows must be numbered 0..m-1 without gaps")
    try:
        core = PolicyClass.from_tables(universe, np.array(core_rows))
        return SunflowerCert(core, tuple(petals[m] for m in range(len(petals))), K, D)
    except ValidationError as e:
        raise FormatError(str(e))


def read_cert(path: PathLike) -> SunflowerCert:
    try:
        return loads_cert(Path(path).read_text())
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")


def write_cert(cert: SunflowerCert, path: PathLike) -> None:
    Path(path).write_text(dumps_cert(cert))
