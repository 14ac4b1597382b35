import random

import pytest
from hypothesis import given, settings, strategies as st

from sessionkit import fixtures, randgen, relations
from sessionkit import types as ty


def tractable(seed, max_nodes=8, higher_order=False):
    return randgen.random_tractable(random.Random(seed), max_nodes,
                                    higher_order=higher_order)


tractable_st = st.integers(0, 10**9).map(tractable)


def check(decls, a, b, kind, **kw):
    return relations.check(ty.parse_type(decls, a), ty.parse_type(decls, b),
                           kind, relations.Budget(**kw) if kw else None)


# ----------------------------------------------------------------------------
# composition


def test_dual_composes_simple():
    s = ty.parse_type("type S = +{ a@1: S, b: end! }")
    v = relations.dual_composes(s)
    assert v.answer == "yes"
    ok, why = relations.validate_witness("compose", v.witness)
    assert ok, why


def test_compose_needs_opposite_polarity():
    v = check("type A = &{ a: end? }  type B = &{ b: end? }", "A", "B", "compose")
    assert v.answer == "no"
    assert v.trace[-1]["clause"] == "polarity"


def test_compose_mixed_polarity_examples():
    # an output meets the matching input even when nested under other actions
    decls = ("type A = &{ a: +{ b: end! } }  type B = +{ a: &{ b: end? } }\n"
             "type C = +{ b: &{ a: end! } }")
    assert check(decls, "A", "B", "compose").answer == "yes"
    assert check(decls, "C", "B", "compose").answer == "yes"


def test_compose_empty_choices():
    decls = "type Z = +{}  type X = &{}  type P = +{ a: end! }  type N = &{ a: end? }"
    assert check(decls, "Z", "N", "compose").answer == "yes"
    assert check(decls, "Z", "P", "compose").answer == "yes"  # 0 absorbs anything
    assert check(decls, "X", "P", "compose").answer == "no"
    assert check(decls, "X", "Z", "compose").answer == "yes"


def test_compose_measure_mismatch():
    v = check("type A = +{ a@1: end! }  type B = &{ a@2: end? }", "A", "B", "compose")
    assert v.answer == "no"
    assert any("measure" in (s.get("note") or "") for s in v.trace)


def test_compose_higher_order_payloads_must_be_dual():
    decls = ("type A = !(end!) . end!  type B = ?(end?) . end?\n"
             "type C = ?(end!) . end?")
    assert check(decls, "A", "B", "compose").answer == "yes"
    assert check(decls, "A", "C", "compose").answer == "no"


def test_server_worker_compose_unknown():
    v = check(fixtures.SERVER_WORKER_TYPES, "S", "U", "compose", max_pairs=2000)
    assert v.answer == "unknown"
    assert v.stats["pairs_frontier"] > 0


# ----------------------------------------------------------------------------
# subtyping


def test_satellite_witness_small():
    v = check(fixtures.SATELLITE_TYPES, "S", "U", "fairsub")
    assert v.answer == "yes"
    assert len(v.witness) <= 6
    ok, why = relations.validate_witness("fairsub", v.witness)
    assert ok, why


def test_witness_validation_rejects_broken_closure():
    v = check(fixtures.SATELLITE_TYPES, "S", "U", "fairsub")
    # deleting any non-root pair breaks clause closure
    for i in range(1, len(v.witness)):
        broken = v.witness[:i] + v.witness[i + 1:]
        ok, _ = relations.validate_witness("fairsub", broken)
        if not ok:
            break
    else:
        pytest.fail("no deletion broke the witness")


def test_counterexample_replays():
    decls = fixtures.VARIANCE_TYPES
    S, T = ty.parse_type(decls, "S"), ty.parse_type(decls, "T")
    v = relations.check(S, T, "fairsub")
    assert v.answer == "no"
    ok, why = relations.validate_counterexample(S, T, "fairsub", v.trace)
    assert ok, why


def test_anticipation_law():
    decls = "type E = !(end!) . ?(end!) . end!  type L = ?(end!) . !(end!) . end!"
    assert check(decls, "E", "L", "fairsub").answer == "yes"
    assert check(decls, "L", "E", "fairsub").answer == "no"


def test_slot_machine_spread():
    expected = {"fairsub": "unknown", "bzfairsub": "no",
                "syncsub": "yes", "asyncsub": "yes"}
    for kind, want in expected.items():
        assert check(fixtures.SLOT_TYPES, "T", "S", kind).answer == want, kind


def test_variant_kinds_reject_higher_order():
    decls = "type A = !(end!) . end!  type B = !(end!) . end!"
    for kind in ("syncsub", "asyncsub", "bzfairsub", "auxsub"):
        with pytest.raises(ValueError):
            check(decls, "A", "B", kind)


def test_async_bounded_anticipation():
    assert check(fixtures.ASYNC_TYPES, "PS", "T", "asyncsub").answer == "no"
    assert check(fixtures.ASYNC_TYPES, "PS", "T", "fairsub").answer == "yes"
    assert check(fixtures.ASYNC_TYPES, "APos", "ASup", "asyncsub").answer == "yes"


def test_zero_and_top_are_extremes():
    rng = random.Random(7)
    zero = ty.parse_type("type Z = +{}")
    top = ty.parse_type("type X = &{}")
    for _ in range(10):
        t = randgen.random_tractable(rng)
        assert relations.check(zero, t, "fairsub").answer == "yes"
        assert relations.check(t, top, "fairsub").answer == "yes"


def test_unknown_budget_and_monotone_stats():
    decls = fixtures.SERVER_WORKER_TYPES
    explored = []
    for n in (100, 400, 1600):
        v = check(decls, "S", "U", "compose", max_pairs=n)
        assert v.answer == "unknown"
        explored.append(v.stats["pairs_explored"])
    assert explored == sorted(explored)


def test_cross_check_consistency():
    r = relations.cross_check_correct_subt(
        ty.parse_type(fixtures.SERVER_WORKER_TYPES, "S"),
        ty.parse_type(fixtures.SERVER_WORKER_TYPES, "U"))
    assert r["consistent"]
    assert r["compose"] == "unknown" and r["fairsub"] == "unknown"


def test_unfair_inputs_warn():
    v = check("type A = +{ a: A }  type B = +{ a: B }", "A", "B", "syncsub")
    assert v.warnings


@given(tractable_st)
@settings(max_examples=30, deadline=None)
def test_reflexivity(t):
    for kind in ("fairsub", "syncsub", "asyncsub", "auxsub"):
        assert relations.check(t, t, kind).answer == "yes"


@given(tractable_st)
@settings(max_examples=25, deadline=None)
def test_dual_composes_random(t):
    v = relations.dual_composes(t)
    assert v.answer == "yes"
    ok, why = relations.validate_witness("compose", v.witness)
    assert ok, why


@given(tractable_st, st.integers(0, 10**9))
@settings(max_examples=25, deadline=None)
def test_definitive_verdicts_validate(t, seed):
    other = randgen.mutate(random.Random(seed), t)
    v = relations.check(t, other, "fairsub")
    if v.answer == "yes":
        ok, why = relations.validate_witness("fairsub", v.witness)
        assert ok, why
    elif v.answer == "no":
        ok, why = relations.validate_counterexample(t, other, "fairsub", v.trace)
        assert ok, why
