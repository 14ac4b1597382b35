"""Executable configurations for the process calculus.

A configuration is a binary tree of cuts whose leaves are threads.  A thread
is a FIFO list of already-sent output items (tags and forked channels) in
front of a guard term.  Reduction happens only at cuts: the earliest pending
item for the cut's channel on one side meets the guard on the other side.

This realizes asynchrony: a sender deposits its outputs into its own pending
list and moves on; matching is deferred until a receiver is ready.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import random

from . import process as pr
from .process import (Done, Link, Close, Wait, Select, Case, Fork, Join,
                      Choice, Cut, Call, ProcessError)


@dataclass(frozen=True)
class TagOut:
    chan: str
    tag: str

    def __str__(self):
        return f"{self.chan}!{self.tag}"


@dataclass(frozen=True)
class ChanOut:
    chan: str
    bound: str
    payload: object  # Configuration

    def __str__(self):
        return f"{self.chan}!({self.bound}){{…}}"


@dataclass(frozen=True)
class Thread:
    pending: tuple
    guard: object  # term

    def key(self):
        return ("thread", tuple(_item_key(i) for i in self.pending), _term_key(self.guard))


@dataclass(frozen=True)
class CutNode:
    chan: str
    left: object
    right: object

    def key(self):
        return ("cut", self.chan, self.left.key(), self.right.key())


def _item_key(i):
    if isinstance(i, TagOut):
        return ("tag", i.chan, i.tag)
    return ("chan", i.chan, i.bound, i.payload.key())


def _term_key(t):
    if isinstance(t, Done):
        return ("done",)
    if isinstance(t, Link):
        return ("link", t.x, t.y)
    if isinstance(t, Close):
        return ("close", t.x)
    if isinstance(t, Wait):
        return ("wait", t.x, _term_key(t.cont))
    if isinstance(t, Select):
        return ("select", t.x, t.tag, _term_key(t.cont))
    if isinstance(t, Case):
        return ("case", t.x, tuple((tg, _term_key(q)) for tg, q in t.branches))
    if isinstance(t, Fork):
        return ("fork", t.x, t.y, _term_key(t.payload), _term_key(t.cont))
    if isinstance(t, Join):
        return ("join", t.x, t.y, _term_key(t.cont))
    if isinstance(t, Choice):
        return ("choice", _term_key(t.left), _term_key(t.right))
    if isinstance(t, Cut):
        return ("cut", t.x, _term_key(t.left), _term_key(t.right))
    if isinstance(t, Call):
        return ("call", t.name, t.args)
    raise ProcessError(f"not a term: {t!r}")


def config_free_names(c) -> frozenset:
    if isinstance(c, Thread):
        names = pr.free_names(c.guard)
        for i in c.pending:
            names |= {i.chan}
            if isinstance(i, ChanOut):
                names |= config_free_names(i.payload) - {i.bound}
        return names
    return (config_free_names(c.left) | config_free_names(c.right)) - {c.chan}


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self, base):
        self.n += 1
        return f"{base}#{self.n}"


# ---------------------------------------------------------------------------
# building configurations from terms


def to_configuration(term, defs=None, fresh: _Fresh | None = None):
    """Strip output prefixes into pending lists; mirror cuts as tree nodes.

    Cut channels and fork binders are renamed to fresh names so that every
    channel name occurs in exactly one session of the tree.
    """
    fresh = fresh or _Fresh()
    return normalize(to_configuration_raw(term, fresh), defs or {}, fresh)


def push_items(c, items):
    """Route output items to the subtree where their channel endpoint lives.

    Items come ordered oldest-first and end up *in front of* existing pending
    items, which were produced later by the continuation.
    """
    if not items:
        return c
    if isinstance(c, Thread):
        return Thread(tuple(items) + c.pending, c.guard)
    left_names = config_free_names(c.left)
    right_names = config_free_names(c.right)
    lt, rt, park = [], [], []
    for i in items:
        in_l, in_r = i.chan in left_names, i.chan in right_names
        if in_l and not in_r:
            lt.append(i)
        elif in_r and not in_l:
            rt.append(i)
        else:
            park.append(i)  # orphan (or ambiguous): keep left, order preserved
    node = CutNode(c.chan,
                   push_items(c.left, lt + park) if (lt or park) else c.left,
                   push_items(c.right, rt) if rt else c.right)
    return node


def normalize(c, defs, fresh):
    """Unfold invocations at guard position and re-split exposed prefixes."""
    if isinstance(c, CutNode):
        return CutNode(c.chan, normalize(c.left, defs, fresh),
                       normalize(c.right, defs, fresh))
    guard = c.guard
    if isinstance(guard, Call):
        if guard.name not in defs:
            raise ProcessError(f"call to unknown definition {guard.name!r}")
        params, body = defs[guard.name]
        body = _freshen(body, fresh)
        body = pr.rename(body, dict(zip(params, guard.args)))
        inner = to_configuration_raw(body, fresh)
        merged = push_items(inner, list(c.pending))
        return normalize(merged, defs, fresh)
    if isinstance(guard, (Select, Fork, Cut)):
        inner = to_configuration_raw(guard, fresh)
        merged = push_items(inner, list(c.pending))
        return normalize(merged, defs, fresh)
    return c


def to_configuration_raw(term, fresh):
    def build(t):
        pending = []
        while True:
            if isinstance(t, Select):
                pending.append(TagOut(t.x, t.tag))
                t = t.cont
            elif isinstance(t, Fork):
                y = fresh(t.y)
                pending.append(ChanOut(t.x, y, build(pr.rename(t.payload, {t.y: y}))))
                t = t.cont
            else:
                break
        if isinstance(t, Cut):
            x = fresh(t.x)
            node = CutNode(x, build(pr.rename(t.left, {t.x: x})),
                           build(pr.rename(t.right, {t.x: x})))
            return push_items(node, pending)
        return Thread(tuple(pending), t)

    return build(term)


def _freshen(term, fresh):
    """Rename every binder in a definition body to a globally fresh name."""
    if isinstance(term, Fork):
        y = fresh(term.y)
        return Fork(term.x, y,
                    _freshen(pr.rename(term.payload, {term.y: y}), fresh),
                    _freshen(term.cont, fresh))
    if isinstance(term, Join):
        y = fresh(term.y)
        return Join(term.x, y, _freshen(pr.rename(term.cont, {term.y: y}), fresh))
    if isinstance(term, Cut):
        x = fresh(term.x)
        return Cut(x, term.left_type, term.right_type,
                   _freshen(pr.rename(term.left, {term.x: x}), fresh),
                   _freshen(pr.rename(term.right, {term.x: x}), fresh),
                   term.cut_id)
    if isinstance(term, (Wait, Select)):
        return type(term)(**{**{f: getattr(term, f) for f in term.__dataclass_fields__},
                             "cont": _freshen(term.cont, fresh)})
    if isinstance(term, Case):
        return Case(term.x, tuple((t, _freshen(q, fresh)) for t, q in term.branches))
    if isinstance(term, Choice):
        return Choice(_freshen(term.left, fresh), _freshen(term.right, fresh))
    return term


def rename_config(c, old, new):
    if isinstance(c, Thread):
        items = tuple(
            TagOut(new if i.chan == old else i.chan, i.tag) if isinstance(i, TagOut)
            else ChanOut(new if i.chan == old else i.chan, i.bound,
                         rename_config(i.payload, old, new))
            for i in c.pending)
        return Thread(items, pr.rename(c.guard, {old: new}))
    if c.chan == old:
        return c
    return CutNode(c.chan, rename_config(c.left, old, new),
                   rename_config(c.right, old, new))


# ---------------------------------------------------------------------------
# redexes


@dataclass(frozen=True)
class Redex:
    rule: str  # choice | select | fork | close | link
    path: tuple  # path to the cut (or thread, for choice): "l"/"r" steps
    chan: str | None = None
    detail: tuple = ()

    def describe(self):
        return {"rule": self.rule, "path": "".join(self.path), "channel": self.chan,
                "detail": list(map(str, self.detail))}


def _subtree(c, path):
    for step in path:
        c = c.left if step == "l" else c.right
    return c


def _replace(c, path, new):
    if not path:
        return new
    if path[0] == "l":
        return CutNode(c.chan, _replace(c.left, path[1:], new), c.right)
    return CutNode(c.chan, c.left, _replace(c.right, path[1:], new))


def _leaf_threads(c, path=()):
    if isinstance(c, Thread):
        yield path, c
    else:
        yield from _leaf_threads(c.left, path + ("l",))
        yield from _leaf_threads(c.right, path + ("r",))


def _first_item_on(thread: Thread, chan: str):
    for idx, item in enumerate(thread.pending):
        if item.chan == chan:
            return idx, item
    return None, None


def enabled_redexes(c) -> list:
    out = []
    for path, th in _leaf_threads(c):
        if isinstance(th.guard, Choice):
            out.append(Redex("choice", path, None, ("left",)))
            out.append(Redex("choice", path, None, ("right",)))

    def visit(node, path):
        if isinstance(node, Thread):
            return
        x = node.chan
        sides = (("l", node.left, node.right), ("r", node.right, node.left))
        for side, mine, other in sides:
            # sender candidates: leaf threads in `mine` whose first x-item leads
            for spath, sth in _leaf_threads(mine, ()):
                idx, item = _first_item_on(sth, x)
                if item is None:
                    continue
                for rpath, rth in _leaf_threads(other, ()):
                    g = rth.guard
                    if isinstance(item, TagOut) and isinstance(g, Case) and g.x == x:
                        if item.tag in dict(g.branches):
                            out.append(Redex("select", path, x,
                                             (side, spath, rpath, item.tag)))
                    elif isinstance(item, ChanOut) and isinstance(g, Join) and g.x == x:
                        out.append(Redex("fork", path, x, (side, spath, rpath)))
            # close: the whole side must be a single thread with guard close x
            # and nothing pending at all (messages must be consumed first)
            if isinstance(mine, Thread) and isinstance(mine.guard, Close) \
                    and mine.guard.x == x and not mine.pending:
                for rpath, rth in _leaf_threads(other, ()):
                    g = rth.guard
                    if isinstance(g, Wait) and g.x == x \
                            and _first_item_on(rth, x)[1] is None:
                        out.append(Redex("close", path, x, (side, rpath)))
            # link: single thread guarded by link mentioning x, no x-items pending
            if isinstance(mine, Thread) and isinstance(mine.guard, Link) \
                    and x in (mine.guard.x, mine.guard.y) \
                    and _first_item_on(mine, x)[1] is None:
                out.append(Redex("link", path, x, (side,)))
        visit(node.left, path + ("l",))
        visit(node.right, path + ("r",))

    visit(c, ())
    return out


def _replace_leaf(c, path, new):
    if not path:
        return new
    if path[0] == "l":
        return CutNode(c.chan, _replace_leaf(c.left, path[1:], new), c.right)
    return CutNode(c.chan, c.left, _replace_leaf(c.right, path[1:], new))


def step(c, r: Redex, fresh: _Fresh):
    if r.rule == "choice":
        th = _subtree(c, r.path)
        branch = th.guard.left if r.detail[0] == "left" else th.guard.right
        return _replace_leaf(c, r.path, Thread(th.pending, branch))

    node = _subtree(c, r.path)
    x = node.chan

    if r.rule == "select":
        side, spath, rpath, tag = r.detail
        mine = node.left if side == "l" else node.right
        other = node.right if side == "l" else node.left
        sth = _subtree(mine, spath)
        idx, _ = _first_item_on(sth, x)
        mine = _replace_leaf(mine, spath,
                             Thread(sth.pending[:idx] + sth.pending[idx + 1:], sth.guard))
        rth = _subtree(other, rpath)
        cont = dict(rth.guard.branches)[tag]
        other = _replace_leaf(other, rpath, Thread(rth.pending, cont))
        left, right = (mine, other) if side == "l" else (other, mine)
        return _replace(c, r.path, CutNode(x, left, right))

    if r.rule == "fork":
        side, spath, rpath = r.detail
        mine = node.left if side == "l" else node.right
        other = node.right if side == "l" else node.left
        sth = _subtree(mine, spath)
        idx, item = _first_item_on(sth, x)
        mine = _replace_leaf(mine, spath,
                             Thread(sth.pending[:idx] + sth.pending[idx + 1:], sth.guard))
        rth = _subtree(other, rpath)
        g = rth.guard  # Join(x, z, cont)
        other = _replace_leaf(other, rpath,
                              Thread(rth.pending,
                                     pr.rename(g.cont, {g.y: item.bound})))
        left, right = (mine, other) if side == "l" else (other, mine)
        # the payload becomes one side of a brand-new cut on the sent channel
        return _replace(c, r.path, CutNode(item.bound, item.payload,
                                           CutNode(x, left, right)))

    if r.rule == "close":
        side, rpath = r.detail
        other = node.right if side == "l" else node.left
        rth = _subtree(other, rpath)
        other = _replace_leaf(other, rpath, Thread(rth.pending, rth.guard.cont))
        return _replace(c, r.path, other)

    if r.rule == "link":
        side = r.detail[0]
        mine = node.left if side == "l" else node.right
        other = node.right if side == "l" else node.left
        g = mine.guard
        y = g.y if g.x == x else g.x
        # forward: the peer of x continues as y; leftover non-x items of the
        # link thread (necessarily on y) are re-routed in front
        result = rename_config(other, x, y)
        if mine.pending:
            result = push_items(result, list(mine.pending))
        return _replace(c, r.path, result)

    raise ProcessError(f"unknown redex {r!r}")


def is_done(c) -> bool:
    return isinstance(c, Thread) and not c.pending and isinstance(c.guard, Done)


# ---------------------------------------------------------------------------
# schedulers


class RandomScheduler:
    name = "random"

    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    def pick(self, c, redexes):
        return self.rng.choice(redexes)


class RoundRobinFair:
    """Deterministic rotation over the sorted redex list; every persistently
    enabled redex is eventually chosen."""
    name = "fair"

    def __init__(self, seed=0):
        self.count = seed

    def pick(self, c, redexes):
        redexes = sorted(redexes, key=lambda r: (r.rule, r.path, str(r.detail)))
        r = redexes[self.count % len(redexes)]
        self.count += 1
        return r


class MinMeasure:
    """Prefer communication; resolve choices toward the branch with the
    smaller measure, which drives well-typed programs to termination."""
    name = "minmeasure"

    def __init__(self, measures=None):
        self.measures = dict(measures or {})

    def term_measure(self, t):
        INF = float("inf")
        if isinstance(t, Done):
            return 0
        if isinstance(t, (Close, Link)):
            return 1
        if isinstance(t, (Wait, Join)):
            return self.term_measure(t.cont)
        if isinstance(t, Select):
            return 1 + self.term_measure(t.cont)
        if isinstance(t, Case):
            return max((self.term_measure(q) for _, q in t.branches), default=0)
        if isinstance(t, Fork):
            return 1 + self.term_measure(t.payload) + self.term_measure(t.cont)
        if isinstance(t, Choice):
            return 1 + min(self.term_measure(t.left), self.term_measure(t.right))
        if isinstance(t, Cut):
            return self.term_measure(t.left) + self.term_measure(t.right)
        if isinstance(t, Call):
            return self.measures.get(t.name, INF)
        return 0

    def pick(self, c, redexes):
        comms = sorted((r for r in redexes if r.rule != "choice"),
                       key=lambda r: (r.rule, r.path, str(r.detail)))
        if comms:
            return comms[0]

        def choice_weight(r):
            th = _subtree(c, r.path)
            branch = th.guard.left if r.detail[0] == "left" else th.guard.right
            return self.term_measure(branch)

        return min(redexes, key=lambda r: (choice_weight(r), r.path, str(r.detail)))


SCHEDULERS = {"random": RandomScheduler, "fair": RoundRobinFair,
              "minmeasure": MinMeasure}


# ---------------------------------------------------------------------------
# the interpreter


@dataclass
class RunResult:
    outcome: str  # DoneReached | StuckNotDone | BudgetExhausted
    steps: int
    final: object
    trace: list = field(default_factory=list)

    def trace_jsonl(self):
        return "\n".join(json.dumps(e) for e in self.trace)


def run(term_or_config, defs=None, scheduler=None, max_steps=1000,
        collect_trace=False, prefix_hook=None) -> RunResult:
    fresh = _Fresh()
    if isinstance(term_or_config, (Thread, CutNode)):
        c = normalize(term_or_config, defs or {}, fresh)
    else:
        c = to_configuration(term_or_config, defs or {}, fresh)
    sched = scheduler or MinMeasure()
    trace = []
    for n in range(max_steps):
        if prefix_hook is not None and n % 10 == 0:
            prefix_hook(c, n)
        if is_done(c):
            return RunResult("DoneReached", n, c, trace)
        redexes = enabled_redexes(c)
        if not redexes:
            return RunResult("StuckNotDone", n, c, trace)
        r = sched.pick(c, redexes)
        if collect_trace:
            entry = r.describe()
            entry["step"] = n
            entry["scheduler"] = getattr(sched, "name", "?")
            trace.append(entry)
        c = step(c, r, fresh)
        c = normalize(c, defs or {}, fresh)
    if is_done(c):
        return RunResult("DoneReached", max_steps, c, trace)
    return RunResult("BudgetExhausted", max_steps, c, trace)


def is_weakly_terminating_probe(c, defs=None, budget=2000) -> bool:
    """Can this configuration still reach done?  Bounded breadth-first search."""
    defs = defs or {}
    fresh = _Fresh()
    if not isinstance(c, (Thread, CutNode)):
        c = to_configuration(c, defs, fresh)
    else:
        c = normalize(c, defs, fresh)
    seen = {c.key()}
    queue = [c]
    explored = 0
    while queue and explored < budget:
        cur = queue.pop(0)
        explored += 1
        if is_done(cur):
            return True
        for r in enabled_redexes(cur):
            nxt = normalize(step(cur, r, fresh), defs, fresh)
            k = nxt.key()
            if k not in seen:
                seen.add(k)
                queue.append(nxt)
    return False
