"""Labelled transitions for session type automata.

A label is an input or output of either the termination signal ``*``, a tag
(with its measure), or a channel carrying a payload type.  Transitions come
in three modes:

- ``must``: the axioms only — the constructor at the root fires directly.
- ``ind``:  least fixed point of the axioms plus the buffering rules that
  let a type input behind pending outputs (and dually).  Witnesses actions
  that happen after finitely many own actions.
- ``full``: adds the fairness corules, then takes the greatest fixed point:
  actions that every fair run eventually performs.

``derivative`` produces the type after an action, again as an automaton:
nodes that fired an axiom continue into the original table, nodes that
buffered continue into a "stepped" copy with the action pushed past them.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import types as ty
from .types import Type, canonicalize, equiv


@dataclass(frozen=True)
class Label:
    direction: str  # "in" | "out"
    msg: tuple  # ("star",) | ("tag", name, measure) | ("chan", Type)

    def __str__(self):
        arrow = "?" if self.direction == "in" else "!"
        if self.msg[0] == "star":
            return arrow + "*"
        if self.msg[0] == "tag":
            _, name, m = self.msg
            return f"{arrow}{name}@{m}" if m else arrow + name
        return f"{arrow}({ty.render_inline(self.msg[1])})"

    def key(self):
        if self.msg[0] == "chan":
            return (self.direction, "chan", self.msg[1].key())
        return (self.direction, *self.msg)

    @property
    def is_first_order(self):
        return self.msg[0] != "chan"


def star(direction: str) -> Label:
    return Label(direction, ("star",))


def tag(direction: str, name: str, measure: int = 0) -> Label:
    return Label(direction, ("tag", name, measure))


def chan(direction: str, payload: Type) -> Label:
    return Label(direction, ("chan", canonicalize(payload)))


def parse_label(text: str, env: dict | None = None) -> Label:
    """``?a``, ``!b@2``, ``!*``, ``?(T)`` with T a type expression."""
    text = text.strip()
    if not text or text[0] not in "?!":
        raise ty.TypeError_(f"label must start with ? or !: {text!r}")
    d = "in" if text[0] == "?" else "out"
    rest = text[1:].strip()
    if rest == "*":
        return star(d)
    if rest.startswith("("):
        if not rest.endswith(")"):
            raise ty.TypeError_(f"unclosed payload in label {text!r}")
        return chan(d, ty.parse_expr(rest[1:-1], env))
    name, _, m = rest.partition("@")
    if not name.isidentifier():
        raise ty.TypeError_(f"bad tag in label {text!r}")
    return tag(d, name, int(m) if m else 0)


# ---------------------------------------------------------------------------
# enabledness


def _axiom_target(t: Type, nid: int, l: Label):
    """Node the axiom steps to, or None if no axiom applies at ``nid``."""
    b = t.nodes[nid]
    k, d, m = b[0], l.direction, l.msg
    if k == "one" and d == "out" and m[0] == "star":
        return nid
    if k == "bot" and d == "in" and m[0] == "star":
        return nid
    if k == "plus" and d == "out" and m[0] == "tag":
        for tg, mm, c in b[1]:
            if tg == m[1] and mm == m[2]:
                return c
    if k == "with" and d == "in" and m[0] == "tag":
        for tg, mm, c in b[1]:
            if tg == m[1] and mm == m[2]:
                return c
    if k == "times" and d == "out" and m[0] == "chan":
        if equiv(t.at(b[1]), m[1]):
            return b[2]
    if k == "par" and d == "in" and m[0] == "chan":
        if equiv(t.at(b[1]), m[1]):
            return b[2]
    return None


def _may_premises(t: Type, nid: int, l: Label):
    """Continuations the buffering rule defers to, or None if it never applies.

    A choice node passes an action of the opposite direction down all of its
    branches; a times/par node passes actions of the opposite direction past
    the payload into the continuation.
    """
    b = t.nodes[nid]
    k, d = b[0], l.direction
    if k == "plus" and d == "in":
        return [c for _, _, c in b[1]]
    if k == "with" and d == "out":
        return [c for _, _, c in b[1]]
    if k == "times" and d == "in":
        return [b[2]]
    if k == "par" and d == "out":
        return [b[2]]
    return None


_ENABLED_CACHE: dict = {}


def enabled_nodes(t: Type, l: Label, mode: str) -> frozenset:
    """Set of node ids of ``canonicalize(t)`` that derive ``l`` in ``mode``."""
    t = canonicalize(t)
    ck = (t.key(), l.key(), mode)
    hit = _ENABLED_CACHE.get(ck)
    if hit is not None:
        return hit
    ids = t.reachable()
    ax = {n for n in ids if _axiom_target(t, n, l) is not None}

    def lfp(fair: bool) -> set:
        cur = set(ax)
        changed = True
        while changed:
            changed = False
            for n in ids:
                if n in cur:
                    continue
                prem = _may_premises(t, n, l)
                if prem is None:
                    continue
                ok = all(c in cur for c in prem)
                if fair and not ok and t.nodes[n][0] in ("plus", "with"):
                    ok = any(c in cur for c in prem)
                if ok:
                    cur.add(n)
                    changed = True
        return cur

    if mode == "must":
        out = frozenset(ax)
    elif mode == "ind":
        out = frozenset(lfp(fair=False))
    elif mode == "full":
        cur = lfp(fair=True)
        changed = True
        while changed:
            changed = False
            for n in list(cur):
                if n in ax:
                    continue
                prem = _may_premises(t, n, l)
                if prem is None or not all(c in cur for c in prem):
                    cur.discard(n)
                    changed = True
        out = frozenset(cur)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if len(_ENABLED_CACHE) > 200_000:
        _ENABLED_CACHE.clear()
    _ENABLED_CACHE[ck] = out
    return out


def enabled(t: Type, l: Label, mode: str = "full") -> bool:
    t = canonicalize(t)
    return t.root in enabled_nodes(t, l, mode)


def derivative(t: Type, l: Label, mode: str = "full") -> Type | None:
    """The residual type after performing ``l``, or None if not enabled.

    Built over a two-layer product: axiom nodes continue into the original
    table; buffering nodes continue into a copy where the action has been
    pushed past the node into its continuations.
    """
    t = canonicalize(t)
    en = enabled_nodes(t, l, mode)
    if t.root not in en:
        return None

    def ref(n):
        # n is enabled; where does its residual live?
        tgt = _axiom_target(t, n, l)
        return ("o", tgt) if tgt is not None else ("s", n)

    nodes = {}
    queue = [ref(t.root)]
    root = queue[0]
    while queue:
        key = queue.pop(0)
        if key in nodes:
            continue
        layer, n = key
        b = t.nodes[n]
        if layer == "o":
            if b[0] in ("plus", "with"):
                body = (b[0], tuple((tg, m, ("o", c)) for tg, m, c in b[1]))
            elif b[0] in ("times", "par"):
                body = (b[0], ("o", b[1]), ("o", b[2]))
            else:
                body = b
        else:
            if b[0] in ("plus", "with"):
                body = (b[0], tuple((tg, m, ref(c)) for tg, m, c in b[1]))
            else:  # times/par buffering: payload kept, action pushed into cont
                body = (b[0], ("o", b[1]), ref(b[2]))
        nodes[key] = body
        if body[0] in ("plus", "with"):
            queue.extend(c for _, _, c in body[1])
        elif body[0] in ("times", "par"):
            queue.extend([body[1], body[2]])

    renum = {k: i for i, k in enumerate(nodes)}
    table = {}
    for k, b in nodes.items():
        if b[0] in ("plus", "with"):
            table[renum[k]] = (b[0], tuple(sorted((tg, m, renum[c]) for tg, m, c in b[1])))
        elif b[0] in ("times", "par"):
            table[renum[k]] = (b[0], renum[b[1]], renum[b[2]])
        else:
            table[renum[k]] = b
    return canonicalize(Type(table, renum[root]))


def enumerate_labels(t: Type, direction: str, mode: str = "full") -> list:
    """All enabled labels in the given direction.

    Candidates are ``*``, every (tag, measure) pair that occurs in the
    automaton, and every payload type (deduplicated up to bisimilarity);
    no other label can be derived.
    """
    t = canonicalize(t)
    cands = [star(direction)]
    seen_tags = set()
    seen_chans = set()
    for n in t.reachable():
        b = t.nodes[n]
        if b[0] in ("plus", "with"):
            for tg, m, _ in b[1]:
                if (tg, m) not in seen_tags:
                    seen_tags.add((tg, m))
                    cands.append(tag(direction, tg, m))
        elif b[0] in ("times", "par"):
            p = t.at(b[1])
            if p.key() not in seen_chans:
                seen_chans.add(p.key())
                cands.append(chan(direction, p))
    return [l for l in cands if t.root in enabled_nodes(t, l, mode)]


# ---------------------------------------------------------------------------
# fair asynchronous derivability oracle


def fas_oracle(t: Type, l: Label) -> bool:
    """Graph-theoretic test for full-mode derivability of ``l``.

    For an input label: (a) the type must not reach a state from which it can
    emit outputs forever, and (b) every reachable state with no outputs left
    must input ``l`` directly.  Dually for output labels.
    """
    t = canonicalize(t)
    own = "out" if l.direction == "in" else "in"

    def own_succs(n):
        b = t.nodes[n]
        if own == "out":
            if b[0] == "one":
                return [n]
            if b[0] == "plus":
                return [c for _, _, c in b[1]]
            if b[0] == "times":
                return [b[2]]
        else:
            if b[0] == "bot":
                return [n]
            if b[0] == "with":
                return [c for _, _, c in b[1]]
            if b[0] == "par":
                return [b[2]]
        return []

    # states reachable while the type acts on its own (buffering direction only)
    ids = [t.root]
    seen = {t.root}
    i = 0
    while i < len(ids):
        for s in own_succs(ids[i]):
            if s not in seen:
                seen.add(s)
                ids.append(s)
        i += 1
    # (a) greatest set of states that can keep doing own-direction actions forever
    div = {n for n in ids if own_succs(n)}
    changed = True
    while changed:
        changed = False
        for n in list(div):
            if not all(s in div for s in own_succs(n)):
                div.discard(n)
                changed = True
    if div:  # ids is exactly what's reachable from the root
        return False
    # (b) every own-terminal state must derive l by axiom (empty choices are vacuous)
    for n in ids:
        if own_succs(n):
            continue
        b = t.nodes[n]
        if b[0] == "plus" and not b[1] and l.direction == "in":
            continue
        if b[0] == "with" and not b[1] and l.direction == "out":
            continue
        if _axiom_target(t, n, l) is None:
            return False
    return True
