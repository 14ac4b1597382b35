"""Type-checking and running the server/worker/client program.

Measure inference bounds how many actions a definition may perform before
doing something observable; the same measures then drive a scheduler that
steers the simulation to completion quickly.
"""

from sessionkit import fixtures, measures, process, runtime

prog = process.parse_program(fixtures.SERVER_PROGRAM)

mu = measures.infer_measures(prog)
print("inferred measures:")
for name, m in sorted(mu.items()):
    print(f"  {name:8} {m}")

rep = measures.typecheck(prog)
print(f"\ntypecheck: {rep.status}")
for ob in rep.obligations:
    print(f"  obligation {ob['id']}: {ob['verdict']}")
# cut-y is the server's internal split/worker connection: the composition
# holds but has no finite witness, so the report stays Conditional rather
# than claiming more than was proved.

print("\nrunning under the measure-driven scheduler:")
res = runtime.run(prog.main, prog.defs, runtime.MinMeasure(mu),
                  max_steps=200, collect_trace=True)
print(f"  {res.outcome} in {res.steps} steps")
for entry in res.trace:
    print(f"    {entry['rule']:6} on {entry['channel']}"
          + (f" ({entry['message']})" if entry.get("message") else ""))

print("\nrandom schedulers also terminate (fair termination, not luck):")
for seed in range(3):
    r = runtime.run(prog.main, prog.defs, runtime.RandomScheduler(seed),
                    max_steps=5000)
    print(f"  seed {seed}: {r.outcome} in {r.steps} steps")

print("\nthe deadlock fixture, by contrast:")
bad = process.parse_program(fixtures.DEADLOCK_PROGRAM)
print(f"  typecheck: {measures.typecheck(bad).status}")
print(f"  run: {runtime.run(bad.main, None, runtime.RandomScheduler(0)).outcome}")
