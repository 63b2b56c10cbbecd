"""Shift a bracket polynomial by m and check the difference identity.

    python3 demos/derivative_walkthrough.py
"""
from genpoly import as_sgp, derivative, parse
from genpoly.evaluate import int_evaluator


def walk(text, m, window):
    h = as_sgp(parse(text))
    d = derivative(h, m)
    lo, hi = window
    print(f"h = {h.text()}   (degree {h.degree}), m = {m}")
    print("  D    =", d.D.text())
    print("  A(D) =", d.A_D.text(), "  vs deg*m*A(h) =", d.target.text())
    print("  delta =", float(d.delta))
    members = d.certification.enumerate(lo, hi)
    print(f"  certified points in [{lo}, {hi}]: {len(members)}")

    f, g = int_evaluator(h.to_expr()), int_evaluator(d.D.to_expr())
    for n in members[:6]:
        lhs = f(n + m) - f(n) - f(m)
        print(f"    n={n:7d}  h(n+m)-h(n)-h(m) = {lhs:14d}   D(n) = {g(n):14d}")
    print("  violations:", d.check(lo, hi))
    print()


walk("[| sqrt2*n^2 |]", 3, (-1000, 1000))
walk("[| sqrt2*n^3 |]", 2, (-20000, 20000))
