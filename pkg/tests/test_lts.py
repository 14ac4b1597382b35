import random

from hypothesis import given, settings, strategies as st

from sessionkit import lts, randgen
from sessionkit import types as ty


def auto(seed, max_nodes=8, higher_order=False):
    return randgen.random_automaton(random.Random(seed), max_nodes,
                                    higher_order=higher_order)


types_st = st.integers(0, 10**9).map(auto)

ONE = ty.parse_type("type T = end!")
BOT = ty.parse_type("type T = end?")


def test_termination_axioms_loop():
    assert ty.equiv(lts.derivative(ONE, lts.star("out"), "must"), ONE)
    assert ty.equiv(lts.derivative(BOT, lts.star("in"), "must"), BOT)
    assert lts.derivative(ONE, lts.star("in"), "full") is None
    assert lts.derivative(BOT, lts.star("out"), "full") is None


def test_choice_axioms():
    t = ty.parse_type("type S = +{ a@2: end!, b: end? }")
    d = lts.derivative(t, lts.tag("out", "a", 2), "must")
    assert ty.equiv(d, ONE)
    assert lts.derivative(t, lts.tag("out", "a", 1), "must") is None  # measure must match
    assert lts.derivative(t, lts.tag("in", "a", 2), "must") is None  # wrong direction


def test_channel_axioms_need_bisimilar_payload():
    t = ty.parse_type("type S = !(P) . end?  type P = +{ a: P }")
    unfolded = ty.parse_type("type P = +{ a: +{ a: P } }")
    other = ty.parse_type("type P = +{ a: +{ b: P } }")
    assert lts.derivative(t, lts.chan("out", unfolded), "must") is not None
    assert lts.derivative(t, lts.chan("out", other), "must") is None
    assert lts.derivative(t, lts.chan("in", unfolded), "must") is None


def test_input_buffers_through_outputs():
    # a late input is anticipated past the pending output in ind and full
    t = ty.parse_type("type S = +{ a: &{ b: end! } }")
    l = lts.tag("in", "b")
    assert lts.derivative(t, l, "must") is None
    d = lts.derivative(t, l, "ind")
    assert ty.equiv(d, ty.parse_type("type S = +{ a: end! }"))
    assert ty.equiv(lts.derivative(t, l, "full"), d)


def test_full_exceeds_ind_on_fair_loops():
    # the input is reachable on every fair run, but not within any bound
    src = "type S1 = +{ a: S1, b: &{ c: end! } }"
    t = ty.parse_type(src)
    l = lts.tag("in", "c")
    assert lts.derivative(t, l, "ind") is None
    d = lts.derivative(t, l, "full")
    assert ty.equiv(d, ty.parse_type("type S = +{ a: S, b: end! }"))


def test_full_requires_all_branches():
    # one looping branch never offers the input: no full transition
    t = ty.parse_type("type S = +{ a: S, b: &{ c: end! }, d: end! }")
    assert lts.derivative(t, lts.tag("in", "c"), "full") is None


def test_external_choice_buffers_outputs():
    t = ty.parse_type("type S = &{ a: +{ c: end? } }")
    assert lts.derivative(t, lts.tag("out", "c"), "full") is not None
    assert lts.derivative(t, lts.tag("out", "d"), "full") is None


def test_empty_choices_are_vacuous():
    zero = ty.parse_type("type Z = +{}")
    top = ty.parse_type("type X = &{}")
    # 0 inputs everything (no branch can fail); ⊤ outputs everything
    assert lts.derivative(zero, lts.tag("in", "x"), "full") is not None
    assert lts.derivative(zero, lts.tag("out", "x"), "full") is None
    assert lts.derivative(top, lts.tag("out", "x"), "full") is not None
    assert lts.derivative(top, lts.tag("in", "x"), "full") is None
    # but not immediately
    assert lts.derivative(zero, lts.tag("in", "x"), "must") is None


def test_enumerate_labels_satellite():
    t = ty.parse_type("type S = +{ cmd: S, stop: &{ data: end? } }")
    outs = {str(l) for l in lts.enumerate_labels(t, "out", "must")}
    assert outs == {"!cmd", "!stop"}
    ins = {str(l) for l in lts.enumerate_labels(t, "in", "full")}
    assert ins == {"?data"}


def test_label_parse_and_render():
    for text in ("?a", "!b@2", "?*", "!*"):
        assert str(lts.parse_label(text)) == text
    l = lts.parse_label("?(+{ a: end! })")
    assert l.msg[0] == "chan" and l.direction == "in"


@given(types_st)
@settings(max_examples=60, deadline=None)
def test_mode_monotonicity(t):
    for d in ("in", "out"):
        must = {l.key() for l in lts.enumerate_labels(t, d, "must")}
        ind = {l.key() for l in lts.enumerate_labels(t, d, "ind")}
        full = {l.key() for l in lts.enumerate_labels(t, d, "full")}
        assert must <= ind <= full


@given(types_st)
@settings(max_examples=60, deadline=None)
def test_duality_symmetry(t):
    # !l transitions of t correspond exactly to ?l transitions of dual(t)
    d = ty.dual(t)
    for mode in ("must", "ind", "full"):
        outs = {l.key()[1:] for l in lts.enumerate_labels(t, "out", mode)
                if l.is_first_order}
        ins = {l.key()[1:] for l in lts.enumerate_labels(d, "in", mode)
               if l.is_first_order}
        assert outs == ins


def test_duality_symmetry_channels():
    t = ty.parse_type("type S = !(+{ a: end! }) . end?")
    p = ty.parse_type("type P = +{ a: end! }")
    assert lts.enabled(t, lts.chan("out", p), "must")
    assert lts.enabled(ty.dual(t), lts.chan("in", ty.dual(p)), "must")


@given(types_st)
@settings(max_examples=100, deadline=None)
def test_full_agrees_with_independent_oracle(t):
    for d in ("in", "out"):
        for l in lts.enumerate_labels(t, d, "full"):
            if l.is_first_order:
                assert lts.fas_oracle(t, l)
    # and some labels that are *not* full-enabled
    for l in (lts.star("in"), lts.star("out"), lts.tag("in", "a"), lts.tag("out", "a")):
        assert lts.enabled(t, l, "full") == lts.fas_oracle(t, l)


@given(types_st)
@settings(max_examples=100, deadline=None)
def test_diamond(t):
    ins = [l for l in lts.enumerate_labels(t, "in", "full") if l.is_first_order]
    outs = [l for l in lts.enumerate_labels(t, "out", "full") if l.is_first_order]
    for li in ins[:3]:
        for lo in outs[:3]:
            if li.msg == ("star",) or lo.msg == ("star",):
                continue
            a = lts.derivative(t, li, "full")
            b = lts.derivative(t, lo, "full")
            ab = lts.derivative(a, lo, "full")
            ba = lts.derivative(b, li, "full")
            assert ab is not None and ba is not None
            assert ty.equiv(ab, ba)
