"""Selection-rule algebra and its text syntax.

Grammar (whitespace insignificant, ``!`` binds tightest, ``->`` loosest and
right-associative)::

    rule     := unit | "!" rule | rule "&" rule | rule "|" rule
              | rule "->" rule | "(" rule ")"
    unit     := "u(" varset "," countset ")"
    varset   := "{" name ("," name)* "}"
    countset := "{" int ("," int)* "}" | "all"

``u(F, all)`` selects every variable of ``F``.

Rule files hold one ``name : rule`` per line with ``#`` comments. Prefixing a
line with ``forced:`` marks a select-all rule whose variables enter every
model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    CountOutOfRange,
    RegistryMismatch,
    RuleSyntaxError,
    UnknownVariable,
)
from .varsets import VarRegistry, VarSet


@dataclass(frozen=True)
class Unit:
    """Select ``k`` variables of ``scope`` for some ``k`` in ``counts``."""

    scope: VarSet
    counts: frozenset

    def __post_init__(self):
        counts = frozenset(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if not self.scope:
            raise ValueError("unit rule needs a non-empty scope")
        if not counts:
            raise ValueError("unit rule needs at least one admissible count")
        if min(counts) < 0 or max(counts) > len(self.scope):
            raise CountOutOfRange(
                f"counts {sorted(counts)} out of range for a scope of {len(self.scope)}"
            )

    @classmethod
    def all_of(cls, scope: VarSet) -> Unit:
        return cls(scope, frozenset([len(scope)]))

    @classmethod
    def any_of(cls, scope: VarSet) -> Unit:
        return cls(scope, frozenset(range(1, len(scope) + 1)))


UnitRule = Unit


@dataclass(frozen=True)
class Not:
    rule: "Rule"


@dataclass(frozen=True)
class And:
    left: "Rule"
    right: "Rule"


@dataclass(frozen=True)
class Or:
    left: "Rule"
    right: "Rule"


@dataclass(frozen=True)
class IfThen:
    antecedent: "Rule"
    consequent: "Rule"


Rule = Union[Unit, Not, And, Or, IfThen]


def registry_of(rule: Rule) -> VarRegistry:
    while not isinstance(rule, Unit):
        if isinstance(rule, Not):
            rule = rule.rule
        elif isinstance(rule, IfThen):
            rule = rule.antecedent
        else:
            rule = rule.left
    return rule.scope.registry


def units(rule: Rule):
    """Yield every unit leaf of ``rule`` from left to right."""
    if isinstance(rule, Unit):
        yield rule
    elif isinstance(rule, Not):
        yield from units(rule.rule)
    elif isinstance(rule, IfThen):
        yield from units(rule.antecedent)
        yield from units(rule.consequent)
    else:
        yield from units(rule.left)
        yield from units(rule.right)


def scope_mask(rule: Rule) -> int:
    m = 0
    for u in units(rule):
        m |= u.scope.mask
    return m


def satisfies(candidate: VarSet, rule: Rule) -> bool:
    if isinstance(rule, Unit):
        if candidate.registry != rule.scope.registry:
            raise RegistryMismatch("candidate and rule use different registries")
        return len(candidate & rule.scope) in rule.counts
    if isinstance(rule, Not):
        return not satisfies(candidate, rule.rule)
    if isinstance(rule, And):
        return satisfies(candidate, rule.left) and satisfies(candidate, rule.right)
    if isinstance(rule, Or):
        return satisfies(candidate, rule.left) or satisfies(candidate, rule.right)
    if isinstance(rule, IfThen):
        return not satisfies(candidate, rule.antecedent) or satisfies(candidate, rule.consequent)
    raise TypeError(f"not a rule: {rule!r}")


def evaluate(rule: Rule, masks: np.ndarray) -> np.ndarray:
    """Vectorized :func:`satisfies` over an array of uint64 masks."""
    if isinstance(rule, Unit):
        k = np.bitwise_count(masks & np.uint64(rule.scope.mask))
        return np.isin(k, np.fromiter(rule.counts, dtype=k.dtype))
    if isinstance(rule, Not):
        return ~evaluate(rule.rule, masks)
    if isinstance(rule, And):
        return evaluate(rule.left, masks) & evaluate(rule.right, masks)
    if isinstance(rule, Or):
        return evaluate(rule.left, masks) | evaluate(rule.right, masks)
    if isinstance(rule, IfThen):
        return ~evaluate(rule.antecedent, masks) | evaluate(rule.consequent, masks)
    raise TypeError(f"not a rule: {rule!r}")


def ifthen_expand(rule: IfThen) -> Rule:
    """Rewrite ``a -> b`` as ``(a & b) | b | (!a & !b)``."""
    if not isinstance(rule, IfThen):
        raise TypeError("ifthen_expand expects an IfThen rule")
    a, b = rule.antecedent, rule.consequent
    return Or(Or(And(a, b), b), And(Not(a), Not(b)))


# -- parsing ---------------------------------------------------------------

_NAME = re.compile(r"[A-Za-z0-9_.:-]+")
_INT = re.compile(r"[0-9]+")


class _Parser:
    def __init__(self, text: str, registry: VarRegistry, line: int = 1, col: int = 1):
        self.text = text
        self.registry = registry
        self.pos = 0
        self.line0 = line
        self.col0 = col

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        before = self.text[:pos]
        line = before.count("\n")
        if line:
            col = pos - before.rfind("\n")
        else:
            col = pos + self.col0
        return self.line0 + line, col

    def error(self, msg, pos=None):
        line, col = self.where(pos)
        return RuleSyntaxError(msg, line, col, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, tok):
        self.skip()
        return self.text.startswith(tok, self.pos)

    def accept(self, tok):
        if self.peek(tok):
            self.pos += len(tok)
            return True
        return False

    def expect(self, tok):
        if not self.accept(tok):
            found = self.text[self.pos:self.pos + 8] or "end of input"
            raise self.error(f"expected {tok!r}, found {found!r}")

    def parse(self) -> Rule:
        rule = self.implication()
        self.skip()
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return rule

    def implication(self):
        left = self.disjunction()
        if self.accept("->"):
            return IfThen(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.accept("|"):
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.accept("&"):
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            rule = self.implication()
            self.expect(")")
            return rule
        if self.peek("u"):
            return self.unit()
        self.skip()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {self.text[self.pos]!r}")

    def unit(self):
        start = self.pos
        self.expect("u")
        self.expect("(")
        scope = self.varset()
        self.expect(",")
        if self.accept("all"):
            counts = frozenset([len(scope)])
        else:
            counts = self.countset()
        self.expect(")")
        try:
            return Unit(scope, counts)
        except CountOutOfRange as exc:
            line, col = self.where(start)
            raise CountOutOfRange(f"{exc} (line {line}, column {col})") from None

    def varset(self):
        self.expect("{")
        names = [self.name()]
        while self.accept(","):
            names.append(self.name())
        self.expect("}")
        return self.registry.varset(names)

    def name(self):
        self.skip()
        m = _NAME.match(self.text, self.pos)
        if not m:
            raise self.error("expected a variable name")
        self.pos = m.end()
        if m.group() not in self.registry:
            line, col = self.where(m.start())
            raise UnknownVariable(f"unknown variable {m.group()!r} (line {line}, column {col})")
        return m.group()

    def countset(self):
        self.expect("{")
        counts = [self.integer()]
        while self.accept(","):
            counts.append(self.integer())
        self.expect("}")
        return frozenset(counts)

    def integer(self):
        self.skip()
        m = _INT.match(self.text, self.pos)
        if not m:
            raise self.error("expected a non-negative integer")
        self.pos = m.end()
        return int(m.group())


def parse_rule(text: str, registry: VarRegistry, *, line: int = 1, col: int = 1) -> Rule:
    return _Parser(text, registry, line, col).parse()


_PREC = {IfThen: 1, Or: 2, And: 3, Not: 4, Unit: 5}


def format_rule(rule: Rule) -> str:
    return _fmt(rule, 0)


def _fmt(rule, parent):
    prec = _PREC[type(rule)]
    if isinstance(rule, Unit):
        counts = ",".join(str(c) for c in sorted(rule.counts))
        s = "u({" + ",".join(rule.scope) + "},{" + counts + "})"
    elif isinstance(rule, Not):
        s = "!" + _fmt(rule.rule, prec)
    elif isinstance(rule, And):
        s = f"{_fmt(rule.left, prec)} & {_fmt(rule.right, prec + 1)}"
    elif isinstance(rule, Or):
        s = f"{_fmt(rule.left, prec)} | {_fmt(rule.right, prec + 1)}"
    else:
        s = f"{_fmt(rule.antecedent, prec + 1)} -> {_fmt(rule.consequent, prec)}"
    return f"({s})" if prec < parent else s


# -- rule sets -------------------------------------------------------------


@dataclass(frozen=True)
class RuleSet:
    """Named rules plus the forced (select-all) variable set."""

    registry: VarRegistry
    rules: tuple  # of (name, Rule)
    forced: VarSet
    forced_name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple((str(n), r) for n, r in self.rules))
        for _, r in self.rules:
            if registry_of(r) != self.registry:
                raise RegistryMismatch("rule uses a different registry")

    @classmethod
    def empty(cls, registry: VarRegistry) -> RuleSet:
        return cls(registry, (), registry.varset())

    @property
    def derivation_universe(self) -> VarSet:
        """All variables except the forced ones."""
        return self.registry.universe() - self.forced

    def names(self):
        return [n for n, _ in self.rules]

    def reduced(self):
        """Rules with forced variables removed from every scope.

        Returns ``(rules, feasible)``; vacuous rules are dropped and
        ``feasible`` is False when some rule cannot hold once the forced
        variables are selected.
        """
        out, feasible = [], True
        for name, r in self.rules:
            s = strip_forced(r, self.forced.mask)
            if s is True:
                continue
            if s is False:
                feasible = False
                continue
            out.append((name, s))
        return out, feasible

    def as_rule(self) -> Rule | None:
        """Conjunction of every rule, the forced rule included."""
        parts = [r for _, r in self.rules]
        if self.forced:
            parts.append(Unit.all_of(self.forced))
        if not parts:
            return None
        rule = parts[0]
        for r in parts[1:]:
            rule = And(rule, r)
        return rule

    def none_or_all(self) -> RuleSet:
        """Relax the forced rule to "select none or all of them".

        Other rules are kept in their forced-reduced form, which is what a
        grouping structure can represent.
        """
        rules, feasible = self.reduced()
        if not feasible:
            raise ValueError("rule set is infeasible once forced variables are selected")
        if self.forced:
            name = self.forced_name or "forced"
            rules.append((name, Unit(self.forced, frozenset([0, len(self.forced)]))))
        return RuleSet(self.registry, tuple(rules), self.registry.varset())

    def to_text(self) -> str:
        lines = [f"{n} : {format_rule(r)}" for n, r in self.rules]
        if self.forced:
            name = self.forced_name or "forced"
            lines.append(f"forced: {name} : u({{{','.join(self.forced)}}}, all)")
        return "\n".join(lines) + "\n"


def strip_forced(rule: Rule, forced_mask: int):
    """Specialize ``rule`` to candidates that contain every forced variable.

    Returns a Rule, or a bool when the rule becomes constant.
    """
    if isinstance(rule, Unit):
        reg = rule.scope.registry
        k = bin(rule.scope.mask & forced_mask).count("1")
        if k == 0:
            return rule
        rest = VarSet(reg, rule.scope.mask & ~forced_mask)
        counts = frozenset(c - k for c in rule.counts if 0 <= c - k <= len(rest))
        if not rest:
            return 0 in counts
        if not counts:
            return False
        return Unit(rest, counts)
    if isinstance(rule, Not):
        inner = strip_forced(rule.rule, forced_mask)
        return (not inner) if isinstance(inner, bool) else Not(inner)
    if isinstance(rule, And):
        a = strip_forced(rule.left, forced_mask)
        b = strip_forced(rule.right, forced_mask)
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
        return And(a, b)
    if isinstance(rule, Or):
        a = strip_forced(rule.left, forced_mask)
        b = strip_forced(rule.right, forced_mask)
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False:
            return a
        return Or(a, b)
    a = strip_forced(rule.antecedent, forced_mask)
    b = strip_forced(rule.consequent, forced_mask)
    if a is False or b is True:
        return True
    if a is True:
        return b
    if b is False:
        return Not(a)
    return IfThen(a, b)


def parse_ruleset(text: str, registry: VarRegistry) -> RuleSet:
    rules = []
    forced = registry.varset()
    forced_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        body, offset = line, 0
        is_forced = False
        stripped = body.lstrip()
        if stripped.startswith("forced:"):
            is_forced = True
            offset = len(body) - len(stripped) + len("forced:")
            body = body[offset:]
        if ":" not in body:
            raise RuleSyntaxError("expected 'name : rule'", lineno, offset + 1, raw)
        name, expr = body.split(":", 1)
        name = name.strip()
        if not name:
            raise RuleSyntaxError("missing rule name", lineno, offset + 1, raw)
        col = offset + len(body.split(":", 1)[0]) + 2
        rule = parse_rule(expr, registry, line=lineno, col=col)
        if is_forced:
            if forced:
                raise RuleSyntaxError("only one rule may be tagged forced:", lineno, 1, raw)
            if not isinstance(rule, Unit) or rule.counts != frozenset([len(rule.scope)]):
                raise RuleSyntaxError("a forced: rule must be u(F, all)", lineno, col, raw)
            forced, forced_name = rule.scope, name
        else:
            rules.append((name, rule))
    return RuleSet(registry, tuple(rules), forced, forced_name)
