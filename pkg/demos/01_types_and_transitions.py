"""Types as automata, duality, and the three transition relations.

The interesting part is the gap between the relations: an action can be
unreachable immediately (`must`), reachable within some bound (`ind`), or
reachable on every fair run without any bound (`full`).
"""

from sessionkit import lts
from sessionkit import types as ty

SRC = """
type S = +{ cmd: S, stop: &{ data: end? } }
"""

s = ty.parse_type(SRC, "S")
print("the type:")
print(ty.render(s, "S"))
print()
print("its dual:")
print(ty.render(ty.dual(s), "DualS"))
print()

label = lts.tag("in", "data")
for mode in ("must", "ind", "full"):
    print(f"?data enabled in mode {mode!r}:", lts.enabled(s, label, mode))

# ?data is immediately blocked behind the internal choice, and because the
# cmd branch loops, no *bound* on the number of buffered outputs suffices —
# but every fair run eventually picks stop, so the full relation fires.
d = lts.derivative(s, label, "full")
print()
print("after buffering ?data past the outputs:")
print(ty.render(d, "S_after"))

print()
print("labels of S:")
for direction in ("out", "in"):
    for mode in ("must", "full"):
        ls = lts.enumerate_labels(s, direction, mode)
        print(f"  {direction}/{mode}: {[str(l) for l in ls]}")
