"""Selection dictionaries of rules and rule sets.

Two independent derivations are provided. :func:`derive_algorithm1` builds the
dictionary from unit dictionaries with set operations only;
:func:`derive_algorithm2` filters the power set with a per-candidate predicate.
They must agree on every rule set both accept.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from itertools import combinations

import numpy as np

from .errors import CapExceeded, UnsupportedRuleShape
from .rules import And, IfThen, Not, Or, Rule, RuleSet, Unit, evaluate, scope_mask
from .varsets import (
    DEFAULT_CAP,
    Dictionary,
    VarSet,
    popcount,
    power_set,
    subset_masks,
)


def _check_cap(n, cap):
    if n > cap:
        raise CapExceeded(f"enumerating {n} variables exceeds the cap of {cap}")


def unit_dictionary(u: Unit, universe: VarSet, cap: int = DEFAULT_CAP) -> Dictionary:
    """``{a | b : a ⊆ scope, |a| in counts, b ⊆ universe - scope}``."""
    if not u.scope <= universe:
        raise ValueError("unit rule scope is not contained in the universe")
    _check_cap(len(universe), cap)
    bits = u.scope.indices()
    heads = [
        sum(1 << b for b in combo)
        for c in sorted(u.counts)
        for combo in combinations(bits, c)
    ]
    heads = np.array(heads, dtype=np.uint64)
    tails = subset_masks((universe - u.scope).mask)
    return Dictionary(universe.registry, (heads[:, None] | tails[None, :]).ravel())


def rule_dictionary(r: Rule, universe: VarSet, cap: int = DEFAULT_CAP) -> Dictionary:
    """Dictionary of ``r`` over ``universe`` by recursive set operations."""
    if isinstance(r, Unit):
        return unit_dictionary(r, universe, cap)
    if isinstance(r, Not):
        return power_set(universe, cap) - rule_dictionary(r.rule, universe, cap)
    if isinstance(r, And):
        return rule_dictionary(r.left, universe, cap) & rule_dictionary(r.right, universe, cap)
    if isinstance(r, Or):
        return rule_dictionary(r.left, universe, cap) | rule_dictionary(r.right, universe, cap)
    if isinstance(r, IfThen):
        d1 = rule_dictionary(r.antecedent, universe, cap)
        d2 = rule_dictionary(r.consequent, universe, cap)
        return (power_set(universe, cap) - d1) | (d1 & d2)
    raise TypeError(f"not a rule: {r!r}")


def filter_dictionary(rules, universe: VarSet, cap: int = DEFAULT_CAP) -> Dictionary:
    """Members of the power set of ``universe`` satisfying every rule."""
    _check_cap(len(universe), cap)
    masks = subset_masks(universe.mask)
    keep = np.ones(masks.shape, dtype=bool)
    for r in rules:
        keep &= evaluate(r, masks)
    return Dictionary(universe.registry, masks[keep])


def derive_algorithm1(rs: RuleSet, cap: int = DEFAULT_CAP) -> Dictionary:
    """Intersect per-rule dictionaries built from unit dictionaries.

    Each rule must be a unit rule or an if-then between two unit rules (after
    forced reduction a negated unit may also appear); the forced variables are removed from the universe and added back at the end.
    """
    rules, feasible = rs.reduced()
    universe = rs.derivation_universe
    reg = rs.registry
    if not feasible:
        return Dictionary(reg)
    for name, r in rules:
        ok = isinstance(r, Unit) or (
            isinstance(r, Not) and isinstance(r.rule, Unit)
        ) or (
            isinstance(r, IfThen)
            and isinstance(r.antecedent, Unit)
            and isinstance(r.consequent, Unit)
        )
        if not ok:
            raise UnsupportedRuleShape(
                f"rule {name!r} is not a unit or unit-to-unit if-then rule; use derive_algorithm2"
            )
    full = power_set(universe, cap)
    d = full
    for _, r in rules:
        if isinstance(r, Unit):
            dj = unit_dictionary(r, universe, cap)
        elif isinstance(r, Not):
            # an if-then whose consequent became impossible once forced
            dj = full - unit_dictionary(r.rule, universe, cap)
        else:
            d1 = unit_dictionary(r.antecedent, universe, cap)
            d2 = unit_dictionary(r.consequent, universe, cap)
            dj = (full - d1) | (d1 & d2)
        d = d & dj
    return d.map_or(rs.forced.mask)


def _components(universe_mask: int, rules) -> list[tuple[int, list]]:
    """Partition rule scopes into variable-disjoint blocks."""
    blocks: list[tuple[int, list]] = []
    for r in rules:
        m = scope_mask(r) & universe_mask
        merged_rules = [r]
        rest = []
        for bm, brules in blocks:
            if bm & m:
                m |= bm
                merged_rules.extend(brules)
            else:
                rest.append((bm, brules))
        rest.append((m, merged_rules))
        blocks = rest
    return blocks


def _filter_block(mask: int, rules, workers: int) -> np.ndarray:
    masks = subset_masks(mask)
    if workers <= 1 or masks.size < 1 << 16:
        chunks = [masks]
    else:
        chunks = np.array_split(masks, workers)

    def run(chunk):
        keep = np.ones(chunk.shape, dtype=bool)
        for r in rules:
            keep &= evaluate(r, chunk)
        return chunk[keep]

    if len(chunks) == 1:
        return run(chunks[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, chunks))
    return np.concatenate(parts)


def derive_algorithm2(
    rs: RuleSet,
    cap: int = DEFAULT_CAP,
    factorize: bool = True,
    workers: int = 1,
) -> Dictionary:
    """Exhaustive filter of the power set, forced variables added afterwards.

    With ``factorize`` the universe is split into blocks of variables linked
    by rule scopes; each block is enumerated separately and the survivors are
    combined by a product, which is exact because no rule spans two blocks.
    ``cap`` bounds both the largest enumerated block and the size of the
    materialized result (``2**cap`` members).
    """
    rules, feasible = rs.reduced()
    universe = rs.derivation_universe
    reg = rs.registry
    if not feasible:
        return Dictionary(reg)
    rules = [r for _, r in rules]
    if not factorize:
        _check_cap(len(universe), cap)
        d = Dictionary(reg, _filter_block(universe.mask, rules, workers))
        return d.map_or(rs.forced.mask)

    blocks = _components(universe.mask, rules)
    covered = 0
    for bm, _ in blocks:
        covered |= bm
    free = universe.mask & ~covered
    parts = []
    for bm, brules in sorted(blocks, key=lambda b: b[0]):
        _check_cap(popcount(bm), cap)
        parts.append(_filter_block(bm, brules, workers))
    total = 2 ** popcount(free)
    for p in parts:
        total *= p.size
    if total > 2**cap:
        raise CapExceeded(f"dictionary would hold {total} members, over 2**{cap}")
    out = subset_masks(free)
    for p in parts:
        out = (out[:, None] | p[None, :]).ravel()
    return Dictionary(reg, out | np.uint64(rs.forced.mask))


def witness(a: Dictionary, b: Dictionary) -> VarSet | None:
    """Smallest-mask set present in exactly one of ``a`` and ``b``."""
    diff = np.setxor1d(a.masks, b.masks, assume_unique=True)
    if diff.size == 0:
        return None
    return VarSet(a.registry, int(diff.min()))


def check_members(d: Dictionary, rules) -> bool:
    """Every member satisfies every rule."""
    keep = np.ones(len(d), dtype=bool)
    for r in rules:
        keep &= evaluate(r, d.masks)
    return bool(keep.all())


__all__ = [
    "unit_dictionary",
    "rule_dictionary",
    "filter_dictionary",
    "derive_algorithm1",
    "derive_algorithm2",
    "witness",
    "check_members",
]
