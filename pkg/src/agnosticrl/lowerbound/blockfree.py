"""Block-free binary matrices"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..core.errors import GuardExceeded, ValidationError

logger = logging.getLogger(__name__)

MAX_COLUMN_SUBSETS = 10**7


class ConstructionFailed(GuardExceeded):
    """Exception raised when no sampled matrix passed every property"""

    def __init__(self, message: str, failures: Dict[str, int]):
        super().__init__(message)
        self.failures = failures


def rows_for(eps: float, ell: int) -> int:
    """N = round(1 / (6 eps^ell))"""
    if not 0 < eps < 1 or ell < 1:
        raise ValidationError("eps must lie in (0, 1) and ell must be at least 1")
    return max(1, round(1.0 / (6.0 * eps**ell)))


def block_height(ell: int, d: int) -> int:
    """k = ceil(ell * log2 d), at least 1"""
    return max(1, math.ceil(ell * math.log2(d))) if d > 1 else 1


def verify_blockfree(B: np.ndarray, k: int, ell: int) -> bool:
    """True iff B has no k x ell submatrix of ones.

    Counts, for every ell-subset of columns, the rows that are one on all of
    them; a block exists iff some count reaches k.

    Raises:
        GuardExceeded: If there are more than MAX_COLUMN_SUBSETS column subsets
    """
    B = np.asarray(B, dtype=bool)
    N, d = B.shape
    if ell > d or k > N:
        return True
    if math.comb(d, ell) > MAX_COLUMN_SUBSETS:
        raise GuardExceeded(f"{math.comb(d, ell)} column subsets exceed {MAX_COLUMN_SUBSETS}")
    heavy = np.nonzero(B.sum(axis=0) >= k)[0]
    for cols in itertools.combinations(heavy, ell):
        if np.count_nonzero(B[:, list(cols)].all(axis=1)) >= k:
            return False
    return True


@dataclass(frozen=True)
class MatrixProperties:
    rows_ok: bool
    columns_ok: bool
    blockfree_ok: bool

    @property
    def ok(self) -> bool:
        return self.rows_ok and self.columns_ok and self.blockfree_ok

    def failed(self):
        return [name for name, flag in
                (("row_sums", self.rows_ok), ("column_sums", self.columns_ok), ("blockfree", self.blockfree_ok))
                if not flag]


def matrix_properties(B: np.ndarray, eps: float, ell: int) -> MatrixProperties:
    """Row sums >= eps d / 2, column sums within [eps N / 2, 2 eps N], block-free"""
    B = np.asarray(B, dtype=bool)
    N, d = B.shape
    rows = B.sum(axis=1)
    cols = B.sum(axis=0)
    return MatrixProperties(
        rows_ok=bool(np.all(rows >= eps * d / 2)),
        columns_ok=bool(np.all((cols >= eps * N / 2) & (cols <= 2 * eps * N))),
        blockfree_ok=verify_blockfree(B, block_height(ell, d), ell),
    )


@dataclass(frozen=True)
class BlockFreeMatrix:
    """Binary N x d matrix with the parameters it was drawn for"""

    B: np.ndarray
    eps: float
    ell: int

    @property
    def shape(self):
        return self.B.shape

    @property
    def k(self) -> int:
        return block_height(self.ell, self.B.shape[1])

    def properties(self) -> MatrixProperties:
        return matrix_properties(self.B, self.eps, self.ell)


def sample_blockfree_matrix(
    eps: float,
    ell: int,
    d: int,
    rng: np.random.Generator,
    max_retries: int = 100,
    strict: bool = True,
) -> BlockFreeMatrix:
    """Draw i.i.d. Ber(eps) matrices until one has every property.

    With strict unset the last draw is returned even when it fails.

    Raises:
        ConstructionFailed: If strict and every draw failed; ``failures`` counts
            how often each property failed
    """
    N = rows_for(eps, ell)
    if d < 1 or max_retries < 1:
        raise ValidationError("d and max_retries must be positive")
    if math.comb(d, ell) > MAX_COLUMN_SUBSETS:
        raise GuardExceeded(f"d={d}, ell={ell} is beyond exact block-free verification")
    failures: Counter = Counter()
    B = None
    for attempt in range(1, max_retries + 1):
        B = (rng.random((N, d)) < eps).astype(np.uint8)
        props = matrix_properties(B, eps, ell)
        if props.ok:
            logger.debug("block-free matrix found on attempt %d", attempt)
            return BlockFreeMatrix(B, eps, ell)
        failures.update(props.failed())
    if strict:
        worst = failures.most_common(1)[0][0]
        raise ConstructionFailed(
            f"no {N}x{d} matrix passed after {max_retries} draws; '{worst}' failed most often",
            dict(failures),
        )
    return BlockFreeMatrix(B, eps, ell)
