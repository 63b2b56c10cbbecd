"""Certified evaluation of expressions at integer points.

``compile_expr(p, P)`` turns a tree into a closure ``n -> value`` working at a
fixed precision of ``P`` bits, where a value is an exact ``int``/``Fraction``
or a fixed-point pair.  A bracket whose argument straddles a half-integer
raises :class:`Straddle`; the public functions catch it and retry with twice
the bits until the policy cap, then give up with :class:`TieUndecidable`.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from . import intervals as iv
from .errors import SymbolicValueError, TieUndecidable, Undecidable
from .expr import Bracket, Monomial, Scale, Sum, format_expr, is_symbolic
from .intervals import DEFAULT_POLICY, CertifiedReal, Straddle


def _compile(p, P):
    if isinstance(p, Monomial):
        c = p.coeff.fixed(P)
        k = p.power
        if k == 0:
            return lambda n: c
        if k == 1:
            return lambda n: iv.mul(c, n, P)
        return lambda n: iv.mul(c, n ** k, P)
    if isinstance(p, Bracket):
        f = _compile(p.child, P)

        def br(n):
            try:
                return iv.nearest(f(n), P)
            except Straddle as s:
                raise Straddle(s.node or p) from None
        return br
    if isinstance(p, Scale):
        c = p.coeff.fixed(P)
        f = _compile(p.child, P)
        return lambda n: iv.mul(c, f(n), P)
    fs = [_compile(c, P) for c in p.children]
    op = iv.add if isinstance(p, Sum) else iv.mul
    first, rest = fs[0], fs[1:]

    def combine(n):
        v = first(n)
        for f in rest:
            v = op(v, f(n), P)
        return v
    return combine


@lru_cache(maxsize=4096)
def compile_expr(p, P):
    if is_symbolic(p):
        raise SymbolicValueError(f"cannot evaluate {format_expr(p)} numerically: free symbols")
    return _compile(p, P)


def _width_ok(v, P):
    if iv.is_exact(v):
        return True
    # width < 2^(-P/2), i.e. (hi - lo) < 2^(P - P/2)
    return (v[1] - v[0]) < (1 << (P - P // 2))


def _run(p, n, policy, decide):
    """Evaluate at escalating precision and hand (value, P) to ``decide``.

    ``decide`` may raise Straddle to ask for more bits.
    """
    last = None
    for P in policy.ladder():
        f = compile_expr(p, P)
        try:
            v = f(n)
            if not _width_ok(v, P) and P * 2 <= policy.cap_bits:
                continue
            return decide(v, P)
        except Straddle as s:
            last = s
    node = last.node if last is not None else p
    text = format_expr(node) if node is not None else format_expr(p)
    raise TieUndecidable(f"bracket [| {text} |] undecidable at n={n} "
                         f"within {policy.cap_bits} bits", expr=text, n=n)


def evaluate(p, n, policy=DEFAULT_POLICY):
    """Certified enclosure of ``p(n)``."""
    return _run(p, n, policy, lambda v, P: CertifiedReal.from_value(v, P))


def value_exact(p, n, policy=DEFAULT_POLICY):
    """``p(n)`` as int/Fraction when exact, else a CertifiedReal."""
    def decide(v, P):
        return v if iv.is_exact(v) else CertifiedReal.from_value(v, P)
    return _run(p, n, policy, decide)


def nearest_of(p, n, policy=DEFAULT_POLICY):
    """``[p(n)]`` with certified tie handling."""
    return _run(p, n, policy, lambda v, P: iv.nearest(v, P))


def frac(p, n, policy=DEFAULT_POLICY):
    """Certified enclosure of ``{p(n)}`` inside (-1/2, 1/2]."""
    def decide(v, P):
        m = iv.nearest(v, P)
        return CertifiedReal.from_value(iv.frac_of(v, m, P), P)
    return _run(p, n, policy, decide)


def frac_within(p, n, eps, policy=DEFAULT_POLICY):
    """Decide ``{p(n)} in (-eps, eps)``; raises Undecidable on a boundary tie."""
    eps = Fraction(eps)

    def decide(v, P):
        m = iv.nearest(v, P)
        f = iv.frac_of(v, m, P)
        if iv.is_exact(f):
            return -eps < f < eps
        e_lo, e_hi = iv.to_fixed(eps, P)
        if f[0] > -e_lo and f[1] < e_lo:
            return True
        if f[1] <= -e_hi or f[0] >= e_hi:
            return False
        raise Straddle(p)
    try:
        return _run(p, n, policy, decide)
    except TieUndecidable as exc:
        raise Undecidable(f"membership of {n} undecidable for {format_expr(p)}: {exc}") from None


def int_evaluator(p, policy=DEFAULT_POLICY):
    """Fast ``n -> int`` for an integer-valued expression.

    Runs the start-precision closure and only falls back to the escalation
    ladder when a bracket straddles.
    """
    P0 = policy.start_bits
    f = compile_expr(p, P0)

    def run(n):
        try:
            v = f(n)
        except Straddle:
            v = value_exact(p, n, policy)
        if isinstance(v, int):
            return v
        if isinstance(v, Fraction) and v.denominator == 1:
            return int(v)
        v = value_exact(p, n, policy)
        if isinstance(v, int):
            return v
        raise ValueError(f"{format_expr(p)} is not integer-valued at n={n}")
    return run
