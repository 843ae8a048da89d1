"""Grouping structures for the latent overlapping group lasso.

The supports a latent overlapping group lasso can return are exactly the
unions of subsets of its groups (:func:`induced_dictionary`). A grouping is
congruent to a rule when that collection equals the rule's dictionary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, OverlapError, RegistryMismatch, UnsupportedRuleShape
from .rules import IfThen, RuleSet, Unit, evaluate
from .varsets import DEFAULT_CAP, Dictionary, VarRegistry, VarSet, mask_bits

KINDS = ("all->all", "any->all", "all->any", "any->any")


@dataclass(frozen=True)
class GroupingStructure:
    registry: VarRegistry
    groups: tuple
    weights: tuple = None
    names: tuple = None
    universe: VarSet = None

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ValueError("a grouping structure needs at least one group")
        seen = set()
        cover = 0
        for g in groups:
            if g.registry != self.registry:
                raise RegistryMismatch("group uses a different registry")
            if not g:
                raise ValueError("empty group")
            if g.mask in seen:
                raise ValueError(f"duplicate group {g!r}")
            seen.add(g.mask)
            cover |= g.mask
        weights = self.weights
        if weights is None:
            weights = tuple(math.sqrt(len(g)) for g in groups)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(groups) or any(not w > 0 for w in weights):
            raise ValueError("need one positive weight per group")
        names = self.names
        if names is None:
            names = tuple(f"g{i + 1}" for i in range(len(groups)))
        names = tuple(names)
        universe = self.universe if self.universe is not None else self.registry.universe()
        if cover != universe.mask:
            missing = VarSet(self.registry, universe.mask & ~cover)
            extra = VarSet(self.registry, cover & ~universe.mask)
            raise ValueError(f"groups must cover the universe exactly (missing {missing!r}, extra {extra!r})")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "universe", universe)

    def __len__(self):
        return len(self.groups)

    def masks(self) -> list[int]:
        return [g.mask for g in self.groups]

    def group_set(self) -> frozenset:
        return frozenset(g.mask for g in self.groups)

    @classmethod
    def singletons(cls, registry: VarRegistry, weights: Sequence[float] | None = None):
        groups = [registry.varset([n]) for n in registry.names]
        return cls(registry, tuple(groups), None if weights is None else tuple(weights),
                   tuple(registry.names))

    def to_json(self) -> str:
        rows = [
            {"name": n, "members": list(g), "weight": w}
            for n, g, w in zip(self.names, self.groups, self.weights)
        ]
        return json.dumps(rows, indent=2) + "\n"

    @classmethod
    def from_json(cls, registry: VarRegistry, text: str) -> GroupingStructure:
        rows = json.loads(text)
        groups, weights, names = [], [], []
        for i, row in enumerate(rows):
            g = registry.varset(row["members"])
            groups.append(g)
            weights.append(float(row.get("weight") or math.sqrt(len(g))))
            names.append(str(row.get("name", f"g{i + 1}")))
        return cls(registry, tuple(groups), tuple(weights), tuple(names))


def _union_closure(masks: Iterable[int]) -> np.ndarray:
    out = np.zeros(1, dtype=np.uint64)
    for m in masks:
        out = np.unique(np.concatenate([out, out | np.uint64(m)]))
    return out


def induced_dictionary(g: GroupingStructure, cap: int = DEFAULT_CAP) -> Dictionary:
    """All unions of subsets of the groups, the empty union included."""
    if len(g) > cap:
        raise CapExceeded(f"{len(g)} groups exceed the cap of {cap}")
    return Dictionary.from_sorted(g.registry, _union_closure(g.masks()))


def ogl_induced_dictionary(g: GroupingStructure, cap: int = DEFAULT_CAP) -> Dictionary:
    """Supports reachable when whole groups are zeroed (overlapping group lasso)."""
    return induced_dictionary(g, cap).complement_sets(g.universe)


@dataclass(frozen=True)
class Congruence:
    congruent: bool
    witness: VarSet | None = None
    # "groups" if the witness is reachable but not in the dictionary
    side: str | None = None

    def __bool__(self):
        return self.congruent


def verify_congruence(g: GroupingStructure, d: Dictionary, cap: int = DEFAULT_CAP) -> Congruence:
    if g.registry != d.registry:
        raise RegistryMismatch("grouping and dictionary use different registries")
    induced = induced_dictionary(g, cap)
    diff = np.setxor1d(induced.masks, d.masks, assume_unique=True)
    if diff.size == 0:
        return Congruence(True)
    w = VarSet(g.registry, int(diff.min()))
    side = "groups" if w in induced else "dictionary"
    return Congruence(False, w, side)


def _units(B: VarSet) -> list[VarSet]:
    """Split ``B`` into roadmap units: registered bundles inside B, else variables."""
    reg = B.registry
    units, left = [], B.mask
    for bm in reg.bundle_masks():
        if bm & B.mask == bm:
            units.append(bm)
            left &= ~bm
    units.extend(1 << i for i in mask_bits(left))
    units.sort(key=lambda m: m & -m)
    return [VarSet(reg, m) for m in units]


def synthesize_roadmap(kind: str, A: VarSet, B: VarSet) -> GroupingStructure:
    """Groups for "if all/any of A then all/any of B".

    Every row starts from one singleton group per unit of B; bundles of B
    (dummy codings of a categorical variable) count as one unit.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if A.registry != B.registry:
        raise RegistryMismatch("A and B use different registries")
    if not A or not B:
        raise ValueError("A and B must be non-empty")
    if not A.isdisjoint(B):
        raise OverlapError(f"A and B overlap on {A & B!r}")
    reg = A.registry
    b_units = _units(B)
    groups = list(b_units)
    a_vars = [VarSet(reg, 1 << i) for i in A.indices()]
    if kind == "all->all":
        groups.append(A | B)
    elif kind == "any->all":
        groups.extend(a | B for a in a_vars)
    elif kind == "all->any":
        groups.extend(b | A for b in b_units)
    else:
        groups.extend(a | b for a in a_vars for b in b_units)
    return GroupingStructure(reg, tuple(groups), universe=A | B)


def roadmap_rule(kind: str, A: VarSet, B: VarSet) -> IfThen:
    """The if-then rule a roadmap row is meant to encode, read literally."""
    head, tail = kind.split("->")
    ante = Unit.all_of(A) if head == "all" else Unit.any_of(A)
    cons = Unit.all_of(B) if tail == "all" else Unit.any_of(B)
    return IfThen(ante, cons)


def combine_structures(
    frags: Sequence[GroupingStructure],
    universe: VarSet | None = None,
    rules: Sequence | None = None,
) -> GroupingStructure:
    """Union of fragment groups, completed with singletons for uncovered variables.

    When ``rules`` are given, a singleton ``{v}`` is dropped if selecting
    ``v`` alone would break one of them.
    """
    if not frags:
        raise ValueError("nothing to combine")
    reg = frags[0].registry
    universe = reg.universe() if universe is None else universe
    groups, weights = [], []
    seen = set()
    for f in frags:
        if f.registry != reg:
            raise RegistryMismatch("fragments use different registries")
        for grp, w in zip(f.groups, f.weights):
            if grp.mask not in seen:
                seen.add(grp.mask)
                groups.append(grp)
                weights.append(w)
    cover = 0
    for grp in groups:
        cover |= grp.mask
    for i in universe.indices():
        if not cover >> i & 1:
            groups.append(VarSet(reg, 1 << i))
            weights.append(1.0)
    if rules:
        masks = np.array([grp.mask for grp in groups], dtype=np.uint64)
        ok = np.ones(masks.size, dtype=bool)
        for r in rules:
            ok &= evaluate(r, masks)
        single = np.array([len(grp) == 1 for grp in groups])
        drop = single & ~ok
        groups = [grp for grp, d in zip(groups, drop) if not d]
        weights = [w for w, d in zip(weights, drop) if not d]
    return GroupingStructure(reg, tuple(groups), tuple(weights), universe=universe)


def classify_unit(u: Unit) -> str:
    n = len(u.scope)
    if u.counts == frozenset([n]):
        return "all"
    if u.counts == frozenset(range(1, n + 1)):
        return "any"
    raise UnsupportedRuleShape(f"unit counts {sorted(u.counts)} match no roadmap")


def synthesize_from_rules(rs: RuleSet) -> GroupingStructure:
    """Roadmap grouping for a rule set of if-then rules plus an optional forced rule.

    The forced rule becomes a single group (none or all of its variables),
    and the other rules are synthesized in their forced-reduced form.
    """
    relaxed = rs.none_or_all()
    frags = []
    for name, r in relaxed.rules:
        if isinstance(r, IfThen) and isinstance(r.antecedent, Unit) and isinstance(r.consequent, Unit):
            kind = f"{classify_unit(r.antecedent)}->{classify_unit(r.consequent)}"
            frags.append(synthesize_roadmap(kind, r.antecedent.scope, r.consequent.scope))
        elif isinstance(r, Unit) and r.counts == frozenset([0, len(r.scope)]):
            frags.append(GroupingStructure(rs.registry, (r.scope,), universe=r.scope))
        else:
            raise UnsupportedRuleShape(f"rule {name!r} has no roadmap")
    if not frags:
        return GroupingStructure.singletons(rs.registry)
    rules = [r for _, r in relaxed.rules]
    return combine_structures(frags, rs.registry.universe(), rules)
