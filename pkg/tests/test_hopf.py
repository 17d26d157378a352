from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from dsegrowth.hopf import (
    UNIT,
    DecoratedTree,
    Forest,
    HopfElement,
    TensorElement,
    all_forests,
    antipode,
    b_plus,
    b_plus_linear,
    check_antipode,
    check_breaking_apart,
    check_coassociativity,
    check_cocycle,
    check_counit,
    check_grading,
    check_involution,
    combinatorial_dse,
    coproduct,
    counit,
    exhaustive_axiom_check,
    forests_of_size,
    parse_forest,
    parse_tree,
    trees_of_size,
)


def E(text: str, c=1) -> HopfElement:
    return HopfElement.of(parse_forest(text), c)


def T(*pairs) -> TensorElement:
    out = TensorElement()
    for c, a, b in pairs:
        out = out + TensorElement.pure(E(a, c), E(b))
    return out


def test_parse_and_canonical_form():
    t = parse_tree("1(2(1),1)")
    assert t == parse_tree("1(1,2(1))")
    assert parse_tree(t.encode()) == t
    assert parse_forest("2 1(1) 1").encode() == parse_forest("1 1(1) 2").encode()
    assert parse_forest("I") == UNIT and parse_forest("") == UNIT
    with pytest.raises(ValueError):
        parse_tree("1(2")


def test_coproduct_examples():
    assert coproduct(UNIT) == T((1, "I", "I"))
    assert coproduct(parse_tree("1")) == T((1, "1", "I"), (1, "I", "1"))
    assert coproduct(parse_tree("1(1)")) == T((1, "1(1)", "I"), (1, "I", "1(1)"), (1, "1", "1"))


def test_coproduct_cherry():
    cherry = parse_tree("1(1,2)")
    expected = T((1, "1(1,2)", "I"), (1, "I", "1(1,2)"), (1, "1", "1(2)"), (1, "2", "1(1)"), (1, "1 2", "1"))
    assert coproduct(cherry) == expected


def test_antipode_examples():
    assert antipode(UNIT) == E("I")
    assert antipode(parse_tree("1")) == E("1", -1)
    assert antipode(parse_tree("1(1)")) == E("1(1)", -1) + E("1 1")


def test_b_plus_examples():
    assert b_plus(UNIT) == parse_tree("1")
    assert b_plus(parse_forest("1 1")) == parse_tree("1(1,1)")
    assert b_plus(Forest.of(b_plus(UNIT))) == parse_tree("1(1)")
    assert b_plus(Forest.of(b_plus(Forest.of(b_plus(UNIT))))) == parse_tree("1(1(1))")
    assert b_plus(parse_forest("2 1"), 3) == parse_tree("3(1,2)")
    assert b_plus_linear(E("1") + E("I", 2), 2) == E("2(1)") + E("2", 2)


def test_cocycle_examples():
    assert check_cocycle(UNIT)
    assert check_cocycle(parse_forest("1"))
    assert check_cocycle(parse_forest("1(2) 2"), 2)


def test_cocycle_needs_the_unit_term():
    # (id (x) B+) Delta alone misses the B+(f) (x) I term
    f = parse_forest("1 1")
    lhs = coproduct(b_plus(f))
    wrong = coproduct(f).apply(1, lambda x: HopfElement.of(b_plus(x)))
    assert lhs != wrong
    assert lhs == wrong + TensorElement.pure(HopfElement.of(b_plus(f)), HopfElement.unit())


def test_counit():
    assert counit(UNIT) == 1
    assert counit(parse_forest("1")) == 0


def test_enumeration_counts():
    # unlabelled rooted trees: 1, 1, 2, 4, 9; with two decorations: 2, 4, 14
    assert [len(trees_of_size(n, (1,))) for n in range(1, 6)] == [1, 1, 2, 4, 9]
    assert [len(trees_of_size(n, (1, 2))) for n in range(1, 4)] == [2, 4, 14]
    assert len(forests_of_size(0)) == 1
    assert len(forests_of_size(2, (1,))) == 2


def test_breaking_apart_examples():
    assert check_breaking_apart(2, 0)
    assert check_breaking_apart(2, 1)
    X = combinatorial_dse(2, 5)
    assert all(check_breaking_apart(2, k, X) for k in range(6))


def test_combinatorial_dse_low_orders():
    X = combinatorial_dse(2, 2)
    assert X[0] == HopfElement.unit()
    assert X[1] == E("1", -1)
    assert X[2].coefficient(parse_forest("1(1)")) == -1
    assert X[2].coefficient(parse_forest("2")) == -1
    assert X[2] == E("1(1)", -1) + E("2", -1)
    with pytest.raises(ValueError):
        combinatorial_dse(0, 2)


@pytest.mark.parametrize("s", [-2, -1, 1, 3])
def test_breaking_apart_other_s(s):
    X = combinatorial_dse(s, 4)
    assert all(check_breaking_apart(s, k, X) for k in range(5))


def test_breaking_apart_fails_for_wrong_exponent():
    # Q-power of the left factor must be 1 - s(k - j); s mismatched between X and the check breaks it
    X = combinatorial_dse(2, 3)
    assert not check_breaking_apart(1, 3, X)


def test_exhaustive_axioms_small():
    failures = exhaustive_axiom_check(max_nodes=4, decorations=(1, 2))
    assert failures and not any(failures.values())


forest_text = st.sampled_from([f.encode() for f in all_forests(5, (1, 2))])


@settings(max_examples=40, deadline=None)
@given(forest_text)
def test_axioms_property(text):
    f = parse_forest(text)
    assert check_coassociativity(f)
    assert check_counit(f)
    assert check_antipode(f)
    assert check_involution(f)
    assert check_grading(f)
    assert check_cocycle(f, 1) and check_cocycle(f, 2)


@settings(max_examples=30, deadline=None)
@given(forest_text, forest_text)
def test_coproduct_is_multiplicative(a, b):
    fa, fb = parse_forest(a), parse_forest(b)
    assert coproduct(fa * fb) == coproduct(HopfElement.of(fa)) * coproduct(HopfElement.of(fb))
    # antipode is an algebra morphism on the commutative algebra
    assert antipode(fa * fb) == antipode(fa) * antipode(fb)


def test_tree_is_hashable_and_immutable():
    t = parse_tree("2(1,1(2))")
    assert {t: 1}[parse_tree("2(1(2),1)")] == 1
    assert isinstance(t, DecoratedTree) and t.size == 4
    with pytest.raises(Exception):
        t.label = 3


def test_exhaustive_check_parallel_matches_serial(monkeypatch):
    serial = exhaustive_axiom_check(max_nodes=3)
    monkeypatch.setenv("DYSON_THREADS", "2")
    assert exhaustive_axiom_check(max_nodes=3) == serial
