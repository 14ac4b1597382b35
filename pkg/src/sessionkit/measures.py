"""Measure inference and type checking for the process calculus.

Measures bound the number of "credits" a process needs to finish its work:
outputs are charged to the sender (1 per close/select/fork plus the tag's
annotation), receivers discharge tag annotations, and a choice costs one
credit plus the cheaper branch.  Definition measures are the least solution
of the resulting equation system, found by Kleene iteration from zero;
values exceeding the cap (2**20) diverge to Infinity, as do definitions
still changing after the round limit.

Type checking walks each definition against its declared signature,
enforcing linearity (every channel consumed exactly once, ``done`` in an
empty context, ``close x`` in exactly {x: end!}).  Side conditions become
explicit obligations for the relation checker: a cut needs its two
annotations to compose, a link ``link x y`` at {x: S, y: T} needs
dual(S) <= T.  Obligations listed in ``assume_cuts`` are taken on trust and
reported as Assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

from . import process as pr, relations, types as ty
from .process import (Done, Link, Close, Wait, Select, Case, Fork, Join,
                      Choice, Cut, Call)
from .types import Type

INF = math.inf
CAP = 2 ** 20
ROUND_LIMIT = 1000


class MeasureError(Exception):
    pass


def _branches(t: Type) -> dict:
    return {tg: (m, t.at(c)) for tg, m, c in t.body()[1]}


def _cap(v):
    return INF if v > CAP else v


def measure_of(term, ctx: dict, mu: dict):
    """Measure of a term given channel types and definition measures."""
    if isinstance(term, Done):
        return 0
    if isinstance(term, Close):
        return 1
    if isinstance(term, Link):
        return 1
    if isinstance(term, Wait):
        return measure_of(term.cont, _without(ctx, term.x), mu)
    if isinstance(term, Select):
        t = _want(ctx, term.x, "plus", term)
        bs = _branches(t)
        if term.tag not in bs:
            raise MeasureError(f"tag {term.tag!r} not offered by the type of {term.x}")
        m, cont = bs[term.tag]
        return _cap(1 + m + measure_of(term.cont, {**ctx, term.x: cont}, mu))
    if isinstance(term, Case):
        t = _want(ctx, term.x, "with", term)
        bs = _branches(t)
        pbs = dict(term.branches)
        best = 0
        for tg, (m, cont) in bs.items():
            if tg not in pbs:
                raise MeasureError(f"case on {term.x} misses branch {tg!r}")
            v = measure_of(pbs[tg], {**ctx, term.x: cont}, mu)
            best = max(best, max(0, v - m))
        return _cap(best)
    if isinstance(term, Fork):
        t = _want(ctx, term.x, "times", term)
        pay, cont = t.at(t.body()[1]), t.at(t.body()[2])
        gp, gq = _split(ctx, term.x, pr.free_names(term.payload) - {term.y})
        return _cap(1 + measure_of(term.payload, {**gp, term.y: pay}, mu)
                    + measure_of(term.cont, {**gq, term.x: cont}, mu))
    if isinstance(term, Join):
        t = _want(ctx, term.x, "par", term)
        pay, cont = t.at(t.body()[1]), t.at(t.body()[2])
        return measure_of(term.cont, {**ctx, term.x: cont, term.y: pay}, mu)
    if isinstance(term, Choice):
        return _cap(1 + min(measure_of(term.left, ctx, mu),
                            measure_of(term.right, ctx, mu)))
    if isinstance(term, Cut):
        gl, gr = _split(ctx, None, pr.free_names(term.left) - {term.x})
        return _cap(measure_of(term.left, {**gl, term.x: term.left_type}, mu)
                    + measure_of(term.right, {**gr, term.x: term.right_type}, mu))
    if isinstance(term, Call):
        return mu.get(term.name, 0)
    raise MeasureError(f"not a term: {term!r}")


def _want(ctx, x, kind, term):
    if x not in ctx:
        raise MeasureError(f"channel {x!r} not in context")
    t = ctx[x]
    if t.kind() != kind:
        raise MeasureError(f"channel {x!r} has kind {t.kind()!r}, expected {kind!r}")
    return t


def _without(ctx, x):
    if x not in ctx:
        raise MeasureError(f"channel {x!r} not in context")
    return {k: v for k, v in ctx.items() if k != x}


def _split(ctx, drop, left_names):
    g = {k: v for k, v in ctx.items() if k != drop}
    gl = {k: v for k, v in g.items() if k in left_names}
    gr = {k: v for k, v in g.items() if k not in left_names}
    return gl, gr


def infer_measures(prog: pr.Program) -> dict:
    """Least fixed point of the definition measure equations."""
    for name in prog.defs:
        if name not in prog.sigs:
            raise MeasureError(f"definition {name!r} has no signature")
    mu = {name: 0 for name in prog.defs}
    for round_ in range(ROUND_LIMIT + 1):
        nxt = {}
        for name, (params, body) in prog.defs.items():
            ctx = dict(zip(params, (t for _, t in prog.sigs[name])))
            nxt[name] = _cap(measure_of(body, ctx, mu))
        if nxt == mu:
            return mu
        mu = nxt
    # still changing: the remaining growth is unbounded
    nxt = {}
    for name, (params, body) in prog.defs.items():
        ctx = dict(zip(params, (t for _, t in prog.sigs[name])))
        nxt[name] = measure_of(body, ctx, mu)
    return {name: (mu[name] if nxt[name] == mu[name] else INF) for name in mu}


# ---------------------------------------------------------------------------
# type checking


class TypecheckError(Exception):
    pass


@dataclass
class TypeReport:
    status: str  # WellTyped | IllTyped | Conditional
    reasons: list = field(default_factory=list)
    obligations: list = field(default_factory=list)
    measures: dict = field(default_factory=dict)

    def to_json(self):
        return {"status": self.status, "reasons": self.reasons,
                "obligations": self.obligations,
                "measures": {k: ("Infinity" if v == INF else v)
                             for k, v in self.measures.items()}}


def typecheck(prog: pr.Program, assume_cuts=(), budget=None) -> TypeReport:
    budget = budget or relations.Budget()
    assume_cuts = set(assume_cuts)
    reasons = []
    obligations = []

    def obligation(kind, ident, verdict):
        obligations.append({"kind": kind, "id": ident, "verdict": verdict})

    def walk(term, ctx, where):
        if isinstance(term, Done):
            if ctx:
                raise TypecheckError(f"{where}: done with live channels {sorted(ctx)}")
            return
        if isinstance(term, Close):
            if term.x not in ctx or ctx[term.x].kind() != "one":
                raise TypecheckError(f"{where}: close {term.x} needs {term.x}: end!")
            if set(ctx) != {term.x}:
                extra = sorted(set(ctx) - {term.x})
                raise TypecheckError(f"{where}: close {term.x} with live channels {extra}")
            return
        if isinstance(term, Wait):
            t = _want_tc(ctx, term.x, "bot", where)
            walk(term.cont, _without_tc(ctx, term.x, where), where)
            return
        if isinstance(term, Link):
            if set(ctx) != {term.x, term.y} or term.x == term.y:
                raise TypecheckError(f"{where}: link {term.x} {term.y} needs exactly "
                                     f"those two channels, context has {sorted(ctx)}")
            s, t = ctx[term.x], ctx[term.y]
            v = relations.check(ty.dual(s), t, "fairsub", budget)
            obligation("link", f"link-{term.x}-{term.y}", v.answer)
            return
        if isinstance(term, Select):
            t = _want_tc(ctx, term.x, "plus", where)
            bs = _branches(t)
            if term.tag not in bs:
                raise TypecheckError(f"{where}: tag {term.tag!r} not in the type of {term.x}")
            walk(term.cont, {**ctx, term.x: bs[term.tag][1]}, where)
            return
        if isinstance(term, Case):
            t = _want_tc(ctx, term.x, "with", where)
            bs = _branches(t)
            pbs = dict(term.branches)
            if not bs:
                return  # the empty external choice types a case in any context
            for tg, (_, cont) in bs.items():
                if tg not in pbs:
                    raise TypecheckError(f"{where}: case on {term.x} misses branch {tg!r}")
                walk(pbs[tg], {**ctx, term.x: cont}, where)
            return
        if isinstance(term, Fork):
            t = _want_tc(ctx, term.x, "times", where)
            pay, cont = t.at(t.body()[1]), t.at(t.body()[2])
            need = pr.free_names(term.payload) - {term.y}
            gp, gq = _split(ctx, term.x, need)
            if need - set(gp):
                raise TypecheckError(f"{where}: payload of {term.x}!({term.y}) uses "
                                     f"unknown channels {sorted(need - set(gp))}")
            walk(term.payload, {**gp, term.y: pay}, where)
            walk(term.cont, {**gq, term.x: cont}, where)
            return
        if isinstance(term, Join):
            t = _want_tc(ctx, term.x, "par", where)
            pay, cont = t.at(t.body()[1]), t.at(t.body()[2])
            if term.y in ctx:
                raise TypecheckError(f"{where}: received channel {term.y} shadows a live one")
            walk(term.cont, {**ctx, term.x: cont, term.y: pay}, where)
            return
        if isinstance(term, Choice):
            walk(term.left, ctx, where)
            walk(term.right, ctx, where)
            return
        if isinstance(term, Cut):
            need = pr.free_names(term.left) - {term.x}
            gl, gr = _split(ctx, None, need)
            if need - set(gl):
                raise TypecheckError(f"{where}: cut on {term.x} uses unknown channels "
                                     f"{sorted(need - set(gl))}")
            if term.cut_id in assume_cuts:
                obligation("cut", term.cut_id, "assumed")
            else:
                v = relations.check(term.left_type, term.right_type, "compose", budget)
                obligation("cut", term.cut_id, v.answer)
            walk(term.left, {**gl, term.x: term.left_type}, where)
            walk(term.right, {**gr, term.x: term.right_type}, where)
            return
        if isinstance(term, Call):
            sig = prog.sigs.get(term.name)
            if sig is None:
                raise TypecheckError(f"{where}: call to {term.name!r} without a signature")
            if len(term.args) != len(sig) or len(set(term.args)) != len(term.args):
                raise TypecheckError(f"{where}: bad argument list for {term.name}")
            if set(term.args) != set(ctx):
                raise TypecheckError(f"{where}: {term.name} call leaves channels "
                                     f"{sorted(set(ctx) ^ set(term.args))} unaccounted")
            for a, (p, t) in zip(term.args, sig):
                if not ty.equiv(ctx[a], t):
                    raise TypecheckError(f"{where}: channel {a} has the wrong type "
                                         f"for parameter {p} of {term.name}")
            return
        raise TypecheckError(f"{where}: not a term: {term!r}")

    measures = {}
    try:
        measures = infer_measures(prog)
    except MeasureError as e:
        reasons.append(f"measure inference: {e}")
    for name, v in measures.items():
        if v == INF:
            reasons.append(f"def {name}: no finite measure")

    for name, (params, body) in prog.defs.items():
        sig = prog.sigs.get(name)
        if sig is None:
            reasons.append(f"def {name}: missing signature")
            continue
        if len(sig) != len(params):
            reasons.append(f"def {name}: signature arity mismatch")
            continue
        ctx = dict(zip(params, (t for _, t in sig)))
        try:
            walk(body, ctx, f"def {name}")
        except TypecheckError as e:
            reasons.append(str(e))
    if prog.main is not None:
        try:
            walk(prog.main, {}, "main")
        except TypecheckError as e:
            reasons.append(str(e))

    bad = [o for o in obligations if o["verdict"] == "no"]
    for o in bad:
        reasons.append(f"{o['kind']} {o['id']}: side condition fails")
    if reasons:
        status = "IllTyped"
    elif any(o["verdict"] in ("unknown", "assumed") for o in obligations):
        status = "Conditional"
    else:
        status = "WellTyped"
    return TypeReport(status, reasons, obligations, measures)


def _want_tc(ctx, x, kind, where):
    if x not in ctx:
        raise TypecheckError(f"{where}: channel {x!r} not in context")
    if ctx[x].kind() != kind:
        raise TypecheckError(f"{where}: channel {x!r} has kind {ctx[x].kind()!r}, "
                             f"expected {kind!r}")
    return ctx[x]


def _without_tc(ctx, x, where):
    return {k: v for k, v in ctx.items() if k != x}
