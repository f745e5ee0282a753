"""Hard instances: block-free matrices, Pi^(ell) classes, lock MDPs and bandit embeddings"""

from .bandit import build_bandit_embedding, embedding_arms
from .blockfree import (
    BlockFreeMatrix,
    ConstructionFailed,
    MatrixProperties,
    block_height,
    matrix_properties,
    rows_for,
    sample_blockfree_matrix,
    verify_blockfree,
)
from .formats import (
    dumps_decoder,
    dumps_matrix,
    loads_decoder,
    loads_matrix,
    read_decoder,
    read_matrix,
    write_decoder,
    write_matrix,
)
from .instance import (
    HardInstance,
    PiEllAudit,
    audit_pi_ell,
    build_hard_mdp,
    build_pi_ell,
    build_reference_mdp,
    exact_value_hard,
    lock_universe,
    relevant_locks,
    sample_decoder,
)

__all__ = [
    "BlockFreeMatrix",
    "ConstructionFailed",
    "HardInstance",
    "MatrixProperties",
    "PiEllAudit",
    "audit_pi_ell",
    "block_height",
    "build_bandit_embedding",
    "build_hard_mdp",
    "build_pi_ell",
    "build_reference_mdp",
    "dumps_decoder",
    "dumps_matrix",
    "embedding_arms",
    "exact_value_hard",
    "loads_decoder",
    "loads_matrix",
    "lock_universe",
    "matrix_properties",
    "read_decoder",
    "read_matrix",
    "relevant_locks",
    "rows_for",
    "sample_blockfree_matrix",
    "sample_decoder",
    "verify_blockfree",
    "write_decoder",
    "write_matrix",
]
