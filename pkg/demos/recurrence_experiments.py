"""Orbit coverage for a weakly mixing subshift next to a rotation.

    python3 demos/recurrence_experiments.py
"""
from genpoly import SymbolicSystem, density_coverage, named_constant, parse

polys = [parse("n^2"), parse("n^2 + n")]
rep = density_coverage(SymbolicSystem.chacon(), polys, 2, (-10 ** 5, 10 ** 5),
                       checkpoints=[10, 100, 10 ** 3, 10 ** 4, 10 ** 5])
print("Chacon, (n^2, n^2+n), depth-2 cylinders")
for hi, cov in rep.checkpoints:
    print(f"  |n| <= {hi:>6}: {cov:.3f}")

rot = SymbolicSystem.rotation(named_constant("sqrt2"))
rep = density_coverage(rot, [parse("n"), parse("2*n")], 8, (-10 ** 5, 10 ** 5),
                       checkpoints=[10 ** 3, 10 ** 5])
print("\nrotation by sqrt2, (n, 2n), 8x8 grid")
for hi, cov in rep.checkpoints:
    print(f"  |n| <= {hi:>6}: {cov:.3f}")
print("  the orbit stays on the line y = 2x, so most cells are never visited")
