"""Text formats for block-free matrices and lock decoders.

``matrix N d eps ell`` followed by N rows of d 0/1 digits, and
``decoder J H pistar`` followed by J rows of H 0/1 digits (1 when the even
state of the pair is the good one).
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..core.errors import FormatError
from .blockfree import BlockFreeMatrix

PathLike = Union[str, Path]


def _content(text: str):
    return [line.strip() for line in text.splitlines() if line.strip() and not line.strip().startswith("#")]


def _bits(rows, width: int, what: str) -> np.ndarray:
    out = np.zeros((len(rows), width), dtype=np.uint8)
    for i, row in enumerate(rows):
        digits = row.split()
        if len(digits) != width or any(d not in ("0", "1") for d in digits):
            raise FormatError(f"{what} row {i} must hold {width} binary digits")
        out[i] = [int(d) for d in digits]
    return out


def dumps_matrix(matrix: BlockFreeMatrix) -> str:
    N, d = matrix.shape
    out = [f"matrix {N} {d} {matrix.eps!r} {matrix.ell}"]
    out += [" ".join(str(int(b)) for b in row) for row in matrix.B]
    return "\n".join(out) + "\n"


def loads_matrix(text: str) -> BlockFreeMatrix:
    lines = _content(text)
    if not lines or lines[0].split()[0] != "matrix":
        raise FormatError("expected header 'matrix N d eps ell'")
    try:
        _, N, d, eps, ell = lines[0].split()
        N, d, eps, ell = int(N), int(d), float(eps), int(ell)
    except ValueError:
        raise FormatError(f"malformed matrix header '{lines[0]}'")
    if len(lines) - 1 != N:
        raise FormatError(f"header announces {N} rows, found {len(lines) - 1}")
    return BlockFreeMatrix(_bits(lines[1:], d, "matrix"), eps, ell)


def dumps_decoder(phi: np.ndarray, pistar_index: int) -> str:
    J, H = phi.shape
    out = [f"decoder {J} {H} {pistar_index}"]
    out += [" ".join(str(int(b)) for b in row) for row in phi]
    return "\n".join(out) + "\n"


def loads_decoder(text: str) -> Tuple[np.ndarray, int]:
    lines = _content(text)
    if not lines or lines[0].split()[0] != "decoder":
        raise FormatError("expected header 'decoder J H pistar'")
    try:
        _, J, H, pistar = lines[0].split()
        J, H, pistar = int(J), int(H), int(pistar)
    except ValueError:
        raise FormatError(f"malformed decoder header '{lines[0]}'")
    if len(lines) - 1 != J:
        raise FormatError(f"header announces {J} locks, found {len(lines) - 1}")
    return _bits(lines[1:], H, "decoder").astype(bool), pistar


def _read(path: PathLike) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}")


def read_matrix(path: PathLike) -> BlockFreeMatrix:
    return loads_matrix(_read(path))


def write_matrix(matrix: BlockFreeMatrix, path: PathLike) -> None:
    Path(path).write_text(dumps_matrix(matrix))


def read_decoder(path: PathLike) -> Tuple[np.ndarray, int]:
    return loads_decoder(_read(path))


def write_decoder(phi: np.ndarray, pistar_index: int, path: PathLike) -> None:
    Path(path).write_text(dumps_decoder(phi, pistar_index))
