import random

import pytest
from hypothesis import given, settings, strategies as st

from sessionkit import randgen
from sessionkit import types as ty


def auto(seed, max_nodes=8, higher_order=False):
    return randgen.random_automaton(random.Random(seed), max_nodes,
                                    higher_order=higher_order)


types_st = st.integers(0, 10**9).map(auto)
ho_types_st = st.integers(0, 10**9).map(lambda s: auto(s, 6, True))


def test_parse_smallest():
    t = ty.parse_type("type S = +{ a: end! }")
    assert t.kind(t.root) == "plus"
    tags = [b[0] for b in t.body(t.root)[1]]
    assert tags == ["a"]


def test_parse_mutual_recursion():
    src = "type S = +{ task@1: S, stop: T }  type T = &{ res: T, stop: end? }"
    s = ty.parse_type(src, "S")
    assert s.kind(s.root) == "plus"
    (tag1, m1, c1), (tag2, m2, c2) = sorted(s.body(s.root)[1])
    assert (tag1, m1) == ("stop", 0)
    assert (tag2, m2, c2) == ("task", 1, s.root)


def test_unguarded_recursion_rejected():
    with pytest.raises(ty.TypeError_):
        ty.parse_type("type S = S")
    with pytest.raises(ty.TypeError_):
        ty.parse_type("type A = B  type B = A", "A")


def test_duplicate_tag_rejected():
    with pytest.raises(ty.TypeError_):
        ty.parse_type("type S = +{ a: end!, a: end! }")


def test_unknown_name():
    with pytest.raises(ty.TypeError_):
        ty.parse_type("type S = end!", "T")


def test_higher_order_parse():
    t = ty.parse_type("type S = !(end!) . ?(end?) . end!")
    assert t.kind(t.root) == "times"
    _, payload, cont = t.body(t.root)
    assert t.kind(payload) == "one"
    assert t.kind(cont) == "par"


def test_empty_choices():
    zero = ty.parse_type("type Z = +{}")
    top = ty.parse_type("type X = &{}")
    assert zero.kind(zero.root) == "plus" and not zero.body(zero.root)[1]
    assert top.kind(top.root) == "with" and not top.body(top.root)[1]
    assert zero != top


def test_dual_swaps_constructors():
    t = ty.parse_type("type S = +{ a: !(end!) . end! }")
    d = ty.dual(t)
    assert d.kind(d.root) == "with"
    _, branches = d.body(d.root)
    (_, _, cont), = branches
    assert d.kind(cont) == "par"


@given(types_st)
@settings(max_examples=80, deadline=None)
def test_dual_involution(t):
    assert ty.equiv(ty.dual(ty.dual(t)), t)


@given(ho_types_st)
@settings(max_examples=40, deadline=None)
def test_dual_involution_higher_order(t):
    assert ty.equiv(ty.dual(ty.dual(t)), t)


@given(types_st)
@settings(max_examples=80, deadline=None)
def test_canonicalize_idempotent_and_bisimilar(t):
    c = ty.canonicalize(t)
    assert ty.equiv(c, t)
    c2 = ty.canonicalize(c)
    assert c2.key() == c.key()


@given(types_st)
@settings(max_examples=60, deadline=None)
def test_key_characterizes_bisimilarity(t):
    d = ty.dual(t)
    assert (t.key() == d.key()) == ty.equiv(t, d)


def test_equiv_folds_unfoldings():
    a = ty.parse_type("type S = +{ a: S }")
    b = ty.parse_type("type S = +{ a: +{ a: S } }")
    assert ty.equiv(a, b)
    assert a == b  # hashes by canonical key
    c = ty.parse_type("type S = +{ a: +{ b: S } }")
    assert not ty.equiv(a, c)


def test_measures_distinguish():
    a = ty.parse_type("type S = +{ a@1: end! }")
    b = ty.parse_type("type S = +{ a@2: end! }")
    assert not ty.equiv(a, b)


def test_fair_termination():
    detail = {}
    assert ty.is_fairly_terminating(ty.parse_type("type S = +{ a: S, b: end! }"), detail)
    assert not detail["degenerate"]

    assert not ty.is_fairly_terminating(ty.parse_type("type S = +{ a: S }"))

    # 0 and ⊤ have no maximal runs at all: vacuously terminating, flagged
    for src in ("type Z = +{}", "type X = &{}"):
        detail = {}
        assert ty.is_fairly_terminating(ty.parse_type(src), detail)
        assert detail["degenerate"]


def test_fair_termination_payload_counts():
    t = ty.parse_type("type S = !(+{ a: P }) . end!  type P = +{ a: P }")
    assert not ty.is_fairly_terminating(t)


@given(types_st)
@settings(max_examples=60, deadline=None)
def test_render_round_trip(t):
    again = ty.parse_type(ty.render(t, "R"), "R")
    assert ty.equiv(again, t)


@given(ho_types_st)
@settings(max_examples=30, deadline=None)
def test_json_round_trip(t):
    assert ty.equiv(ty.from_json(ty.to_json(t)), t)


@given(types_st)
@settings(max_examples=40, deadline=None)
def test_dual_preserves_fair_termination(t):
    assert ty.is_fairly_terminating(t) == ty.is_fairly_terminating(ty.dual(t))
