"""Generalized-polynomial expression trees in the variable ``n``.

Nodes are frozen dataclasses, so structural equality and hashing come for
free.  ``format_expr`` writes the canonical, fully parenthesized text form
that :func:`genpoly.parse.parse` reads back to an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

from .coeffs import ONE, Coefficient, as_coefficient


@dataclass(frozen=True)
class Monomial:
    coeff: Coefficient
    power: int

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("power must be nonnegative")


@dataclass(frozen=True)
class Bracket:
    child: "GPExpr"


@dataclass(frozen=True)
class Scale:
    coeff: Coefficient
    child: "GPExpr"


@dataclass(frozen=True)
class Sum:
    children: Tuple["GPExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Sum needs at least two children")


@dataclass(frozen=True)
class Product:
    children: Tuple["GPExpr", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Product needs at least two children")


GPExpr = Union[Monomial, Bracket, Scale, Sum, Product]


# --- small constructors ----------------------------------------------------

def mono(coeff=1, power=1):
    return Monomial(as_coefficient(coeff), power)


def bracket(child):
    return Bracket(child)


def scale(coeff, child):
    coeff = as_coefficient(coeff)
    if coeff == ONE:
        return child
    return Scale(coeff, child)


def add(*children):
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, Sum) else (c,))
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*children):
    flat = []
    for c in children:
        flat.extend(c.children if isinstance(c, Product) else (c,))
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def sub(a, b):
    return add(a, scale(-1, b))


# --- queries -----------------------------------------------------------------

def children(p):
    if isinstance(p, (Bracket, Scale)):
        return (p.child,)
    if isinstance(p, (Sum, Product)):
        return p.children
    return ()


def walk(p):
    yield p
    for c in children(p):
        yield from walk(c)


def coefficients(p):
    for node in walk(p):
        if isinstance(node, (Monomial, Scale)):
            yield node.coeff


def free_symbols(p):
    out = set()
    for c in coefficients(p):
        out |= c.free_symbols()
    return out


def is_symbolic(p):
    return any(c.is_symbolic() for c in coefficients(p))


def has_n(p):
    """True when ``n`` occurs in ``p`` with a nonzero coefficient."""
    if isinstance(p, Monomial):
        return p.power > 0 and not p.coeff.is_zero()
    if isinstance(p, Scale):
        return not p.coeff.is_zero() and has_n(p.child)
    if isinstance(p, Bracket):
        return has_n(p.child)
    if isinstance(p, Sum):
        return any(has_n(c) for c in p.children)
    return all(has_n(c) for c in p.children)


def nominal_degree(p):
    """Upper bound on the degree read off the tree (brackets ignored)."""
    if isinstance(p, Monomial):
        return p.power
    if isinstance(p, (Bracket, Scale)):
        return nominal_degree(p.child)
    if isinstance(p, Sum):
        return max(nominal_degree(c) for c in p.children)
    return sum(nominal_degree(c) for c in p.children)


# --- transformations ---------------------------------------------------------

def map_monomials(p, fn):
    if isinstance(p, Monomial):
        return fn(p)
    if isinstance(p, Bracket):
        return Bracket(map_monomials(p.child, fn))
    if isinstance(p, Scale):
        return Scale(p.coeff, map_monomials(p.child, fn))
    kids = tuple(map_monomials(c, fn) for c in p.children)
    return type(p)(kids)


def substitute_scale(p, k):
    """The expression ``p(k*n)``."""
    if not isinstance(k, int) or k < 1:
        raise ValueError("scale factor must be a positive integer")
    return map_monomials(p, lambda m: Monomial(m.coeff * k ** m.power, m.power))


# --- text --------------------------------------------------------------------

def _format_mono(m, force):
    base = "n" if m.power == 1 else f"n^{m.power}"
    if m.power == 0:
        return f"({m.coeff.paren_text()})"
    if m.coeff == ONE and not force:
        return base
    return f"({m.coeff.paren_text()}*{base})"


def format_expr(p, _force=False):
    """Canonical text.  A monomial under a scale, or beside another monomial
    in a product, is wrapped so that the parser does not fold it."""
    if isinstance(p, Monomial):
        return _format_mono(p, _force)
    if isinstance(p, Bracket):
        return f"[| {format_expr(p.child)} |]"
    if isinstance(p, Scale):
        return f"({p.coeff.paren_text()} * {format_expr(p.child, True)})"
    if isinstance(p, Sum):
        return "(" + " + ".join(format_expr(c) for c in p.children) + ")"
    force = sum(isinstance(c, Monomial) for c in p.children) > 1
    return "(" + " * ".join(format_expr(c, force) for c in p.children) + ")"
