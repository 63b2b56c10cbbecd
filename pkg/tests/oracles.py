"""Independent reference implementations used by the tests.

Values are recomputed from the *printed* form of coefficients with gmpy2
floating point at 2048 bits, and brackets use ``ceil(x - 1/2)`` directly.
Nothing here touches the package's fixed-point engine.
"""

import random
import re
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from genpoly.expr import Bracket, Monomial, Product, Scale, Sum

BITS = 2048
gmpy2.get_context().precision = BITS

_TOKEN = re.compile(r"sqrt(\d+)|pi|\be\b|golden|(\d+)|\^")


def coeff_value(c):
    """Value of a numeric coefficient from its text form."""
    text = c.text() if hasattr(c, "text") else str(c)

    def repl(m):
        if m.group(1):
            return f"_sqrt(_f({m.group(1)}))"
        if m.group(0) == "pi":
            return "_pi"
        if m.group(0) == "e":
            return "_e"
        if m.group(0) == "golden":
            return "_golden"
        if m.group(0) == "^":
            return "**"
        return f"_f({m.group(2)})"
    src = _TOKEN.sub(repl, text)
    env = {"_sqrt": gmpy2.sqrt, "_f": mpfr, "_pi": gmpy2.const_pi(),
           "_e": gmpy2.exp(mpfr(1)), "_golden": (1 + gmpy2.sqrt(mpfr(5))) / 2}
    return eval(src, {"__builtins__": {}}, env)


def nearest(x):
    """Nearest integer, ties to the smaller one."""
    return int(gmpy2.ceil(x - mpfr(1) / 2))


def frac(x):
    return x - nearest(x)


def to_fraction(x):
    return Fraction(*x.as_integer_ratio())


def value(p, n):
    """High-precision value of an expression tree at ``n``."""
    return _value(p, n)


def _value(p, n):
    if isinstance(p, Monomial):
        return coeff_value(p.coeff) * mpfr(n) ** p.power
    if isinstance(p, Bracket):
        return mpfr(nearest(_value(p.child, n)))
    if isinstance(p, Scale):
        return coeff_value(p.coeff) * _value(p.child, n)
    if isinstance(p, Sum):
        total = mpfr(0)
        for c in p.children:
            total = total + _value(c, n)
        return total
    if isinstance(p, Product):
        total = mpfr(1)
        for c in p.children:
            total = total * _value(c, n)
        return total
    raise TypeError(p)


def int_value(p, n):
    v = value(p, n)
    k = int(gmpy2.rint(v))
    assert abs(v - k) < mpfr(2) ** -100, f"not an integer at n={n}"
    return k


def frac_of_expr(p, n):
    return frac(value(p, n))


def brute_members(items, lo, hi):
    """Members of a constraint list ``[(expr, eps)]`` by direct conjunction."""
    out = []
    for n in range(lo, hi + 1):
        if all(abs(to_fraction(frac_of_expr(g, n))) < Fraction(eps) for g, eps in items):
            out.append(n)
    return out


# --- random families -----------------------------------------------------------------

IRRATIONALS = ["sqrt2", "sqrt3", "sqrt5", "sqrt7", "pi", "e", "golden"]


def random_coeff(rng, small=False):
    base = rng.choice(IRRATIONALS)
    num = rng.randint(1, 9) * rng.choice([1, -1])
    den = rng.randint(1, 7)
    scale = f"{num}/{den}" if den > 1 else f"{num}"
    if small:
        return f"{scale}/1000*{base}"
    return f"{scale}*{base}"


def random_hat_text(rng, depth=2, max_power=2):
    """Random nested hat ``c n^j [ c' n^j' [ ... ] ]`` as text (not bracketed)."""
    c = random_coeff(rng)
    j = rng.randint(0 if depth > 1 else 1, max_power)
    inner = ""
    if depth > 1 and rng.random() < 0.6:
        inner = f"*[| {random_hat_text(rng, depth - 1, max_power)} |]"
    core = f"{c}*n^{j}" if j else c
    if not inner and j == 0:
        core = f"{c}*n"
    return core + inner


def random_sgp_text(rng, terms=2, depth=2, max_power=2):
    parts = []
    for _ in range(terms):
        coef = rng.choice([1, 1, 1, 2, -1, -3])
        parts.append(f"{coef}*[| {random_hat_text(rng, depth, max_power)} |]")
    return " + ".join(parts)


def rng_for(seed):
    return random.Random(seed)


_COEFF_CACHE = {}


def _coeff_cached(c):
    key = c.text()
    if key not in _COEFF_CACHE:
        _COEFF_CACHE[key] = coeff_value(c)
    return _COEFF_CACHE[key]


def compile_oracle(p):
    """Closure ``n -> mpfr`` with coefficients evaluated once."""
    if isinstance(p, Monomial):
        c, k = _coeff_cached(p.coeff), p.power
        return lambda n: c * mpfr(n) ** k
    if isinstance(p, Bracket):
        f = compile_oracle(p.child)
        return lambda n: mpfr(nearest(f(n)))
    if isinstance(p, Scale):
        c, f = _coeff_cached(p.coeff), compile_oracle(p.child)
        return lambda n: c * f(n)
    if isinstance(p, Sum):
        fs = [compile_oracle(c) for c in p.children]
        return lambda n: sum((f(n) for f in fs), mpfr(0))
    if isinstance(p, Product):
        fs = [compile_oracle(c) for c in p.children]

        def prod(n):
            out = mpfr(1)
            for f in fs:
                out = out * f(n)
            return out
        return prod
    raise TypeError(p)
