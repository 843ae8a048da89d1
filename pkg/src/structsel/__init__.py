"""Selection-rule algebra, selection dictionaries and the latent overlapping group lasso."""

from .varsets import Dictionary, VarRegistry, VarSet, power_set, set_ops
from .rules import And, IfThen, Not, Or, RuleSet, Unit, parse_rule, parse_ruleset, satisfies

__version__ = "0.1.0"

__all__ = [
    "And",
    "Dictionary",
    "IfThen",
    "Not",
    "Or",
    "RuleSet",
    "Unit",
    "VarRegistry",
    "VarSet",
    "parse_rule",
    "parse_ruleset",
    "power_set",
    "satisfies",
    "set_ops",
]
