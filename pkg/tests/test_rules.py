import pytest
from hypothesis import given, settings

from oracles import holds, subsets
from strategies import registry_and_rule, registry_and_rule_pair
from structsel.errors import (
    CountOutOfRange,
    RegistryMismatch,
    RuleSyntaxError,
    UnknownVariable,
)
from structsel.rules import (
    And,
    IfThen,
    Not,
    Or,
    RuleSet,
    Unit,
    format_rule,
    ifthen_expand,
    parse_rule,
    parse_ruleset,
    satisfies,
    strip_forced,
)
from structsel.varsets import VarRegistry, VarSet


def all_candidates(reg):
    return [VarSet(reg, m) for m in range(reg.full_mask + 1)]


def test_parse_table_rule(study_registry):
    r = parse_rule("u({HighDoseDOAC},{1}) -> u({DOAC},{1})", study_registry)
    assert r == IfThen(
        Unit(study_registry.varset(["HighDoseDOAC"]), frozenset([1])),
        Unit(study_registry.varset(["DOAC"]), frozenset([1])),
    )


def test_parse_count_out_of_range(abc):
    with pytest.raises(CountOutOfRange):
        parse_rule("u({A},{2})", abc)


def test_parse_nested_tree(abc):
    r = parse_rule("!(u({A},{1}) & u({B},{1})) | u({A,B},{0})", abc)
    assert isinstance(r, Or)
    assert isinstance(r.left, Not) and isinstance(r.left.rule, And)
    assert r.right == Unit(abc.varset(["A", "B"]), frozenset([0]))


def test_precedence_and_associativity(abc):
    a, b, c = (f"u({{{n}}},{{1}})" for n in "ABC")
    r = parse_rule(f"{a} | {b} & {c}", abc)
    assert isinstance(r, Or) and isinstance(r.right, And)
    r = parse_rule(f"{a} -> {b} -> {c}", abc)
    assert isinstance(r.consequent, IfThen)
    r = parse_rule(f"!{a} & {b}", abc)
    assert isinstance(r, And) and isinstance(r.left, Not)


def test_all_sugar(abc):
    assert parse_rule("u({A, B}, all)", abc) == Unit(abc.varset(["A", "B"]), frozenset([2]))


def test_syntax_error_position(abc):
    with pytest.raises(RuleSyntaxError) as info:
        parse_rule("u({A},{1}) &", abc)
    assert info.value.lineno == 1 and info.value.offset == 13
    with pytest.raises(RuleSyntaxError):
        parse_rule("u({A},{1}) u({B},{1})", abc)
    with pytest.raises(UnknownVariable) as info:
        parse_rule("u({A,Z},{1})", abc)
    assert "column 6" in str(info.value)


def test_ruleset_file(study_registry):
    text = """
    # comment
    r1 : u({HighDoseDOAC},{1}) -> u({DOAC},{1})
    forced: keep : u({Age,Sex}, all)
    """
    rs = parse_ruleset(text, study_registry)
    assert rs.names() == ["r1"]
    assert set(rs.forced) == {"Age", "Sex"}
    back = parse_ruleset(rs.to_text(), study_registry)
    assert back == rs
    with pytest.raises(RuleSyntaxError) as info:
        parse_ruleset("r1 u({DOAC},{1})", study_registry)
    assert info.value.lineno == 1
    with pytest.raises(RuleSyntaxError):
        parse_ruleset("forced: f : u({Age,Sex},{1})", study_registry)


def test_satisfies_rule_1_1(study_registry, study_rules):
    r11 = dict(study_rules.rules)["1.1"]
    assert satisfies(study_registry.varset(["DOAC", "HighDoseDOAC"]), r11)
    assert not satisfies(study_registry.varset(["HighDoseDOAC"]), r11)


def test_vacuous_rule(abc):
    r = Unit(abc.universe(), frozenset(range(4)))
    assert all(satisfies(x, r) for x in all_candidates(abc))


def test_unit_truth_table(abc):
    r = Unit(abc.varset(["A", "B"]), frozenset([1]))
    got = {frozenset(x.names) for x in all_candidates(abc) if satisfies(x, r)}
    assert got == {frozenset(s) for s in ("A", "B", "AC", "BC")}


def test_satisfies_registry_mismatch(abc):
    other = VarRegistry(("A", "B"))
    with pytest.raises(RegistryMismatch):
        satisfies(other.varset(["A"]), Unit(abc.varset(["A"]), frozenset([1])))


def test_unit_validation(abc):
    with pytest.raises(ValueError):
        Unit(abc.varset(), frozenset([0]))
    with pytest.raises(ValueError):
        Unit(abc.varset(["A"]), frozenset())


def test_ifthen_expand_examples():
    reg = VarRegistry(("A", "B"))
    r1 = Unit(reg.varset(["A"]), frozenset([1]))
    r2 = Unit(reg.varset(["B"]), frozenset([1]))
    rule = IfThen(r1, r2)
    assert ifthen_expand(rule) == Or(Or(And(r1, r2), r2), And(Not(r1), Not(r2)))
    for x in all_candidates(reg):
        assert satisfies(x, rule) == satisfies(x, ifthen_expand(rule))
    refl = ifthen_expand(IfThen(r1, r1))
    assert all(satisfies(x, refl) for x in all_candidates(reg))
    with pytest.raises(TypeError):
        ifthen_expand(r1)


@given(registry_and_rule(max_size=10))
@settings(max_examples=150, deadline=None)
def test_format_parse_round_trip(pair):
    reg, rule = pair
    back = parse_rule(format_rule(rule), reg)
    assert back == rule
    for x in all_candidates(reg):
        assert satisfies(x, back) == satisfies(x, rule)


@given(registry_and_rule(max_size=8))
@settings(max_examples=150, deadline=None)
def test_satisfies_matches_oracle(pair):
    reg, rule = pair
    for s in subsets(reg.names):
        assert satisfies(reg.varset(s), rule) == holds(rule, s)


@given(registry_and_rule_pair(max_size=10))
@settings(max_examples=100, deadline=None)
def test_expand_and_de_morgan(triple):
    reg, a, b = triple
    expanded = ifthen_expand(IfThen(a, b))
    left = Not(And(a, b))
    right = Or(Not(a), Not(b))
    for x in all_candidates(reg):
        assert satisfies(x, expanded) == satisfies(x, IfThen(a, b))
        assert satisfies(x, left) == satisfies(x, right)


@given(registry_and_rule(max_size=8))
@settings(max_examples=150, deadline=None)
def test_strip_forced_is_specialization(pair):
    reg, rule = pair
    forced = 0b1 if reg.full_mask > 1 else 0
    s = strip_forced(rule, forced)
    for x in all_candidates(reg):
        if x.mask & forced != forced:
            continue
        want = satisfies(x, rule)
        got = s if isinstance(s, bool) else satisfies(x, s)
        assert got == want


def test_forced_rewrite_of_study_rules(study_registry, study_rules):
    reduced = dict(study_rules.reduced()[0])
    assert format_rule(reduced["2.1"]) == "u({DOAC:Antiplatelets},{1}) -> u({DOAC},{1})"
    assert format_rule(reduced["2.2"]) == "u({DOAC:NSAIDs},{1}) -> u({DOAC},{1})"
    assert reduced["2.3"] == dict(study_rules.rules)["2.3"]


def test_none_or_all_relaxation(study_rules):
    relaxed = study_rules.none_or_all()
    assert not relaxed.forced
    last_name, last = relaxed.rules[-1]
    assert last_name == "3"
    assert last.counts == frozenset([0, 10])


def test_empty_ruleset(abc):
    rs = RuleSet.empty(abc)
    assert rs.as_rule() is None
    assert rs.reduced() == ([], True)
