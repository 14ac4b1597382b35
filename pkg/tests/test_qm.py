import json
import random

from sessionkit import lts, qm, relations
from sessionkit import types as ty


def machine(delta, states=("s",), sigma=("a",), gamma=("a", "$")):
    return qm.QueueMachine.from_json({
        "states": list(states), "sigma": list(sigma), "gamma": list(gamma),
        "dollar": "$", "start": states[0],
        "delta": {f"{q},{a}": [q2, w] for (q, a), (q2, w) in delta.items()}})


DRAIN = machine({("s", "a"): ("s", ""), ("s", "$"): ("s", "")})
LOOP = machine({("s", "a"): ("s", "a"), ("s", "$"): ("s", "$")})


def test_simulate_accepts():
    res = qm.simulate(DRAIN, "aaa")
    assert res.outcome == "Accepted"
    assert res.steps == 4  # three letters plus the end marker
    assert res.history[0] == ("s", "aaa$")
    assert res.history[-1] == ("s", "")


def test_simulate_stuck():
    m = machine({("s", "$"): ("s", "")})  # no rule for letter a
    assert qm.simulate(m, "a").outcome == "Stuck"


def test_simulate_out_of_fuel():
    assert qm.simulate(LOOP, "a", max_steps=50).outcome == "OutOfFuel"


def test_json_round_trip():
    blob = json.dumps(DRAIN.to_json())
    again = qm.QueueMachine.from_json(json.loads(blob))
    assert again.to_json() == DRAIN.to_json()


def test_queue_type_spells_contents():
    t = qm.queue_type(DRAIN, "a$")
    assert t.kind(t.root) == "plus"
    (tag, _, cont), = t.body(t.root)[1]
    assert tag == "a"
    assert t.kind(cont) == "plus"


def test_control_type_inputs_then_outputs():
    t = qm.control_type(LOOP, "s")
    assert t.kind(t.root) == "with"
    # after reading a, the control re-emits it
    d = lts.derivative(t, lts.tag("in", "a"), "must")
    assert d is not None
    assert lts.derivative(d, lts.tag("out", "a"), "must") is not None


def test_step_correspondence_examples():
    for m, w in ((DRAIN, "aa"), (LOOP, "a"), (DRAIN, ""), (LOOP, "")):
        rep = qm.step_correspondence(m, w, max_steps=30)
        assert rep["all_ok"], (m.to_json(), w)


def test_accepting_encoding_never_composes():
    qt, ct = qm.encode(DRAIN, "aa")
    v = relations.check(qt, ct, "compose", relations.Budget(400))
    assert v.answer != "yes"


def test_random_machines_correspond():
    rng = random.Random(2024)
    for _ in range(8):
        m = qm.random_machine(rng)
        word = "".join(rng.choice(m.sigma) for _ in range(rng.randint(0, 4)))
        rep = qm.step_correspondence(m, word)
        assert rep["all_ok"]
        if rep["sim"].outcome == "Accepted":
            qt, ct = qm.encode(m, word)
            v = relations.check(qt, ct, "compose", relations.Budget(400))
            assert v.answer != "yes"
