"""Correct composition: definite answers where possible, honest unknowns
where not.

Every type composes with its dual — that check always closes.  The
server/worker pair is genuinely harder: composition holds, but the producer
can run arbitrarily far ahead of the consumer, so the proof needs one game
pair per pending message and the bounded solver reports unknown instead of
guessing.
"""

from sessionkit import fixtures, relations
from sessionkit import types as ty

s = ty.parse_type("type S = +{ task@1: S, stop: end! }")
v = relations.dual_composes(s)
print(f"compose(dual(S), S) = {v.answer}, witness has {len(v.witness)} pairs")

S = ty.parse_type(fixtures.SERVER_WORKER_TYPES, "S")
U = ty.parse_type(fixtures.SERVER_WORKER_TYPES, "U")
print()
print("server/worker composition at growing budgets:")
for n in (100, 500, 2000):
    v = relations.check(S, U, "compose", relations.Budget(max_pairs=n))
    print(f"  max_pairs={n:5}: {v.answer}  "
          f"(explored {v.stats['pairs_explored']}, "
          f"frontier {v.stats['pairs_frontier']})")

print()
print("cross-check against subtyping (compose(S,T) iff S <= dual(T)):")
r = relations.cross_check_correct_subt(S, U)
print(f"  compose: {r['compose']}, fairsub vs dual: {r['fairsub']}, "
      f"consistent: {r['consistent']}")

print()
print("a definite no, with the violation pinpointed:")
bad = relations.check(ty.parse_type("type A = +{ a@1: end! }"),
                      ty.parse_type("type B = &{ a@2: end? }"), "compose")
print(f"  {bad.answer}: {bad.reason}")
for step in bad.trace:
    print(f"    [{step['clause']}] note: {step.get('note')}")
