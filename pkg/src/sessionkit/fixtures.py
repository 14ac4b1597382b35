"""Built-in corpus of worked examples.

Each fixture is self-contained (no external data) and carries its expected
outcome, so `kit corpus run` doubles as an end-to-end self test.  The
expectations record what the bounded checker actually establishes; fixtures
whose mathematically true verdict needs an infinite witness are expected
``unknown`` and say so in their note.
"""

from __future__ import annotations

from . import measures, process, qm, relations, runtime, types as ty

SERVER_PROGRAM = """
type V = +{ resp: end! }
type S = +{ task@1: S, stop: T }
type T = &{ res: T, stop: end? }
type U = &{ task@1: +{ res: U }, stop: +{ stop: end! } }
type XS = &{ req: V }
type XC = +{ req: &{ resp: end? } }

sig Server(x: XS)
sig Split(x: V, y: S)
sig Gather(x: V, y: T)
sig Worker(y: U)
sig C(x: XC)

def Server(x) = case x { req: new y : S >< U { Split(x, y) || Worker(y) } }
def Split(x, y) = y!task.Split(x, y) (+) y!stop.Gather(x, y)
def Gather(x, y) = case y { res: Gather(x, y), stop: wait y.x!resp.close x }
def Worker(y) = case y { task: y!res.Worker(y), stop: y!stop.close y }
def C(x) = x!req.case x { resp: wait x.done }

new x : XS >< XC { Server(x) || C(x) }
"""

LINK_SUBSUMPTION_PROGRAM = """
# a worker accessed through a link: subsumption via the link rule
type U = &{ task@1: +{ res: U }, stop: +{ stop: end! } }
type DU = +{ task@1: &{ res: DU }, stop: &{ stop: end? } }
type DS = &{ task@1: DS, stop: DT }
type DT = +{ res: DT, stop: end! }

sig Worker(y: U)
sig LinkedWorker(y: DS)

def Worker(y) = case y { task: y!res.Worker(y), stop: y!stop.close y }
def LinkedWorker(y) = new z : DU >< U { link z y || Worker(z) }
"""

DEADLOCK_PROGRAM = "new x : end! >< end? { close y || wait x.done }"

OMEGA_PROGRAM = "sig Omega()\ndef Omega() = Omega() (+) Omega()\nOmega()"

SLOT_TYPES = """
type S = &{ play: +{ win: S, lose: S }, quit: end! }
type T = &{ play: +{ lose: T }, quit: end! }
"""

SATELLITE_TYPES = """
type U = &{ data: U, stop: V }
type V = +{ cmd: V, stop: end? }
type S = +{ cmd: S, stop: T }
type T = &{ data: T, stop: end? }
"""

VARIANCE_TYPES = """
type S = &{ a: S, b: +{ c: end! } }
type T = &{ a: T }
type R = +{ a: R }
type Sub = +{ c: S2 }
type S2 = &{ a: S2, b: end! }
"""

ASYNC_TYPES = """
type PS = +{ a: S }
type S = &{ b: S, c: end! }
type T = &{ b: T, c: +{ a: end! } }
type APos = +{ a: &{ b: end!, c: &{ d: end! } } }
type ASup = &{ b: +{ a: end! }, c: &{ d: +{ a: end! } } }
"""

SERVER_WORKER_TYPES = """
type S = +{ task@1: S, stop: T }
type T = &{ res: T, stop: end? }
type U = &{ task@1: +{ res: U }, stop: +{ stop: end! } }
"""

QM_COUNTDOWN = {
    "states": ["s"], "sigma": ["a"], "gamma": ["a", "$"], "dollar": "$",
    "start": "s",
    "delta": {"s,a": ["s", ""], "s,$": ["s", ""]},
}

QM_LOOP = {
    "states": ["s"], "sigma": ["a"], "gamma": ["a", "$"], "dollar": "$",
    "start": "s",
    "delta": {"s,a": ["s", "a"], "s,$": ["s", "$"]},
}


def _rel(name, description, decls, left, right, relation, expected, note=None):
    return {"name": name, "kind": "relation", "description": description,
            "types": decls, "left": left, "right": right,
            "relation": relation, "expected": expected, "note": note}


def _prog(name, description, source, expected_typecheck, expected_run=None,
          assume=(), max_steps=1000, expected_probe=None):
    return {"name": name, "kind": "program", "description": description,
            "source": source, "assume": list(assume),
            "expected_typecheck": expected_typecheck,
            "expected_run": expected_run, "max_steps": max_steps,
            "expected_probe": expected_probe}


def corpus() -> list:
    return [
        _rel("satellite-subtyping",
             "early command output is a fair asynchronous subtype of the full-duplex protocol",
             SATELLITE_TYPES, "S", "U", "fairsub", "yes"),
        _rel("satellite-dualized",
             "the satellite witness survives dualization with the sides swapped",
             SATELLITE_TYPES, "dual:U", "dual:S", "fairsub", "yes"),
        _rel("output-anticipation",
             "sending a channel before an unrelated receive refines receiving first",
             "type Early = !(end!) . ?(end!) . end!\ntype Late = ?(end!) . !(end!) . end!",
             "Early", "Late", "fairsub", "yes"),
        _rel("output-anticipation-inverse",
             "the converse direction fails immediately on polarity",
             "type Early = !(end!) . ?(end!) . end!\ntype Late = ?(end!) . !(end!) . end!",
             "Late", "Early", "fairsub", "no"),
        _rel("slot-machine-fair",
             "fair slot machine refined by the losing-only one: true, but every "
             "witness needs unboundedly deep buffering, so the bounded game "
             "cannot close",
             SLOT_TYPES, "T", "S", "fairsub", "unknown",
             note="semantically yes; no finite witness exists"),
        _rel("slot-machine-strict",
             "the losing-only machine is rejected once output reachability matters",
             SLOT_TYPES, "T", "S", "bzfairsub", "no"),
        _rel("slot-machine-sync",
             "plain synchronous subtyping accepts the losing-only machine",
             SLOT_TYPES, "T", "S", "syncsub", "yes"),
        _rel("slot-machine-async",
             "bounded-anticipation asynchronous subtyping also accepts it",
             SLOT_TYPES, "T", "S", "asyncsub", "yes"),
        _rel("failed-variance",
             "an early output with no counterpart in the supertype is rejected",
             VARIANCE_TYPES, "S", "T", "fairsub", "no"),
        _rel("variance-early-output",
             "committing immediately to the early output is a valid refinement",
             VARIANCE_TYPES, "Sub", "S", "fairsub", "yes"),
        _rel("early-output-compose",
             "a peer that never inputs cannot consume the early output",
             VARIANCE_TYPES, "S", "R", "compose", "no"),
        _rel("bounded-anticipation-counterexample",
             "anticipating past unboundedly many inputs is beyond the inductive relation",
             ASYNC_TYPES, "PS", "T", "asyncsub", "no"),
        _rel("bounded-anticipation-fair",
             "the fair relation accepts the same pair",
             ASYNC_TYPES, "PS", "T", "fairsub", "yes"),
        _rel("bounded-anticipation-positive",
             "anticipation through finitely many inputs is within the inductive relation",
             ASYNC_TYPES, "APos", "ASup", "asyncsub", "yes"),
        _rel("compose-empty-choice",
             "the empty internal choice composes with anything",
             "type Z = +{}\ntype Any = &{ a: end? }", "Z", "Any", "compose", "yes"),
        _rel("compose-full-choice",
             "the empty external choice composes only with the empty internal choice",
             "type Top = &{}\ntype P = +{ a: end! }", "Top", "P", "compose", "no"),
        _rel("measure-mismatch",
             "matching tags with different measure annotations do not synchronize",
             "type A = +{ a@1: end! }\ntype B = &{ a@2: end? }",
             "A", "B", "compose", "no"),
        _rel("server-worker-compose",
             "producer may flood the worker: true composition, infinite witness, honest unknown",
             SERVER_WORKER_TYPES, "S", "U", "compose", "unknown",
             note="semantically yes; witness needs one pair per pending task"),
        _prog("server-client",
              "the full server composed with a client; conditional on the one "
              "cut the bounded checker cannot close",
              SERVER_PROGRAM, "Conditional", "DoneReached",
              expected_probe=True),
        _prog("server-client-assumed",
              "same program with the unprovable cut explicitly assumed",
              SERVER_PROGRAM, "Conditional", "DoneReached", assume=("cut-y",)),
        _prog("link-subsumption",
              "a worker used at the supertype through a link; both obligations "
              "need infinite witnesses, so the report stays conditional",
              LINK_SUBSUMPTION_PROGRAM, "Conditional"),
        _prog("deadlock",
              "the classic ill-typed deadlock: close on a foreign channel",
              DEADLOCK_PROGRAM, "IllTyped", "StuckNotDone"),
        _prog("omega",
              "an infinite chooser: deadlock-free but diverging, so it admits "
              "no finite measure",
              OMEGA_PROGRAM, "IllTyped", "BudgetExhausted", max_steps=50,
              expected_probe=False),
        {"name": "qm-accepting", "kind": "qm",
         "description": "a machine that drains its queue; acceptance makes the "
                        "encoded endpoints incompatible",
         "machine": QM_COUNTDOWN, "input": "aa", "expected_sim": "Accepted",
         "compose_not_yes": True},
        {"name": "qm-diverging", "kind": "qm",
         "description": "a machine that recycles its queue forever",
         "machine": QM_LOOP, "input": "a", "expected_sim": "OutOfFuel",
         "compose_not_yes": False},
    ]


def _resolve(decls: str, name: str):
    if name.startswith("dual:"):
        return ty.dual(ty.parse_type(decls, name[5:]))
    return ty.parse_type(decls, name)


def run_fixture(f: dict, budget: relations.Budget | None = None) -> dict:
    """Execute one fixture and compare against its expectations."""
    budget = budget or relations.Budget()
    out = {"name": f["name"], "ok": True, "details": {}}

    def expect(field, got, want):
        out["details"][field] = {"got": got, "want": want}
        if want is not None and got != want:
            out["ok"] = False

    if f["kind"] == "relation":
        left = _resolve(f["types"], f["left"])
        right = _resolve(f["types"], f["right"])
        v = relations.check(left, right, f["relation"], budget)
        expect("verdict", v.answer, f["expected"])
        if v.answer == "yes":
            ok, why = relations.validate_witness(f["relation"], v.witness)
            expect("witness_valid", ok, True)
        if v.answer == "no":
            ok, why = relations.validate_counterexample(left, right, f["relation"], v.trace)
            expect("counterexample_valid", ok, True)
    elif f["kind"] == "program":
        prog = process.parse_program(f["source"])
        rep = measures.typecheck(prog, assume_cuts=f["assume"], budget=budget)
        expect("typecheck", rep.status, f["expected_typecheck"])
        if f["expected_run"] is not None and prog.main is not None:
            mu = {}
            try:
                mu = measures.infer_measures(prog)
            except measures.MeasureError:
                pass
            res = runtime.run(prog.main, prog.defs, runtime.MinMeasure(mu),
                              max_steps=f["max_steps"])
            expect("run", res.outcome, f["expected_run"])
        if f.get("expected_probe") is not None and prog.main is not None:
            got = runtime.is_weakly_terminating_probe(prog.main, prog.defs, 500)
            expect("probe", got, f["expected_probe"])
    elif f["kind"] == "qm":
        m = qm.QueueMachine.from_json(f["machine"])
        sim = qm.simulate(m, f["input"])
        expect("sim", sim.outcome, f["expected_sim"])
        rep = qm.step_correspondence(m, f["input"])
        expect("correspondence", rep["all_ok"], True)
        if f["compose_not_yes"]:
            qt, ct = qm.encode(m, f["input"])
            v = relations.check(qt, ct, "compose", relations.Budget(400))
            expect("compose_not_yes", v.answer != "yes", True)
    else:
        out["ok"] = False
        out["details"]["error"] = f"unknown fixture kind {f['kind']!r}"
    return out
