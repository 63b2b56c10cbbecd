"""Watch the weight vector fall until only linear terms remain.

    python3 demos/pet_descent.py
"""
from genpoly import as_sgp, parse, pet_reduce

system = ["[| sqrt2*n^2 |]", "[| sqrt3*n^2 |] + n", "n^3"]
P = [as_sgp(parse(t)) for t in system]
run = pet_reduce(P)

print("system:", ", ".join(system))
print("scaled by", run.scale)
for i, step in enumerate(run.steps):
    print(f"step {i}: {step.phi_before.to_json()} -> {step.phi_after.to_json()}"
          f"  ({len(step.P_prime)} elements)")
print("final degrees:", sorted({p.degree for p in run.final}))
