"""Config-driven batch experiments"""

from .recipes import RECIPES, Recipe, closed_form_capacity, get_recipe, load_class, planted_singleton_mdp
from .report import RunReport, dumps_report, emit_report, enforce_acceptance, load_report, run_experiment

__all__ = [
    "RECIPES",
    "Recipe",
    "RunReport",
    "closed_form_capacity",
    "dumps_report",
    "emit_report",
    "enforce_acceptance",
    "get_recipe",
    "load_class",
    "load_report",
    "planted_singleton_mdp",
    "run_experiment",
]
