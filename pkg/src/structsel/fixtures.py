"""Embedded copies of the anticoagulant study registry, rules and grouping."""

from __future__ import annotations

from importlib import resources

from .grouping import GroupingStructure
from .rules import RuleSet, parse_ruleset
from .varsets import VarRegistry

STUDY_DICTIONARY_SIZE = 32512


def _read(name: str) -> str:
    return resources.files("structsel").joinpath("data", name).read_text()


def registry_text() -> str:
    return _read("study_registry.txt")


def rules_text() -> str:
    return _read("study_rules.txt")


def groups_text() -> str:
    return _read("study_groups.json")


def study_registry() -> VarRegistry:
    return VarRegistry.from_text(registry_text())


def study_rules(registry: VarRegistry | None = None) -> RuleSet:
    return parse_ruleset(rules_text(), registry or study_registry())


def study_groups(registry: VarRegistry | None = None) -> GroupingStructure:
    return GroupingStructure.from_json(registry or study_registry(), groups_text())
