"""Queue machines encoded as session types.

A queue machine (finite control + FIFO queue) is Turing-powerful.  Encoding
its configurations as a pair of session types turns each machine step into
type transitions — and makes the machine's acceptance problem a composition
question, which is why the composition checker must be a semi-decision.
"""

import random

from sessionkit import qm, relations
from sessionkit import types as ty

drain = qm.QueueMachine.from_json({
    "states": ["s"], "sigma": ["a"], "gamma": ["a", "$"], "dollar": "$",
    "start": "s",
    "delta": {"s,a": ["s", ""], "s,$": ["s", ""]},
})

print("a machine that drains its queue, on input 'aa':")
sim = qm.simulate(drain, "aa")
for q, w in sim.history:
    print(f"  state {q}, queue {w!r}")
print(f"  -> {sim.outcome}")

qt, ct = qm.encode(drain, "aa")
print("\nencoded queue endpoint:")
print(ty.render(qt, "Queue"))
print("encoded control endpoint:")
print(ty.render(ct, "Control"))

rep = qm.step_correspondence(drain, "aa")
print(f"\nper-step correspondence between machine and types: {rep['all_ok']}")

# acceptance = the composition is *not* correct: the drained machine leaves
# the control endpoint waiting forever
v = relations.check(qt, ct, "compose", relations.Budget(400))
print(f"compose(queue, control) for the accepting run: {v.answer}")

print("\nrandom machines, same story:")
rng = random.Random(7)
for i in range(5):
    m = qm.random_machine(rng)
    word = "".join(rng.choice(m.sigma) for _ in range(rng.randint(0, 4)))
    rep = qm.step_correspondence(m, word)
    print(f"  machine {i}: input {word!r}, sim {rep['sim'].outcome}, "
          f"correspondence {rep['all_ok']}")
