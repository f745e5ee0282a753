"""Deterministic Markovian policies, finite classes and their builders"""

from .builders import (
    CLASS_BUILDERS,
    build_all_active,
    build_cb_chain,
    build_class,
    build_constant,
    build_layer_indicator,
    build_ltons,
    build_one_active,
    build_singletons,
    build_tabular,
    build_threshold,
    build_tree_paths,
    parse_class_spec,
    tree_node,
)
from .formats import dumps_class, loads_class, read_class, write_class
from .policy import Policy, PolicyClass, consistent

__all__ = [
    "CLASS_BUILDERS",
    "Policy",
    "PolicyClass",
    "build_all_active",
    "build_cb_chain",
    "build_class",
    "build_constant",
    "build_layer_indicator",
    "build_ltons",
    "build_one_active",
    "build_singletons",
    "build_tabular",
    "build_threshold",
    "build_tree_paths",
    "consistent",
    "dumps_class",
    "loads_class",
    "parse_class_spec",
    "read_class",
    "tree_node",
    "write_class",
]
