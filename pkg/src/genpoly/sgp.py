"""Normal form for simple generalized polynomials.

A :class:`Hat` is ``coeff * n^power * [B_1] * ... * [B_k]`` where each ``B_i``
is itself a Hat.  Nested L-forms ``a1 n^j1 [a2 n^j2 [ ... ]]`` and products of
them are special cases.  A :class:`Term` is ``c * [H]`` (bracketed) or ``H``
itself (unbracketed, used for integer-valued hats and for real leftovers that
a structural query still wants to see).  :class:`SGPNormal` is a tuple of
terms, kept exactly as produced: merging of like terms is a separate,
explicit step, because the leading sum is read off the unmerged list.

``reduce_expr`` rewrites any expression tree into this form, collecting the
real hats whose fractional parts must stay small for the rewrite to be exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Tuple

from .coeffs import ONE, ZERO, Coefficient, as_coefficient
from .errors import NotGP, NotSGP
from .expr import (Bracket, Monomial, Product, Scale, Sum, format_expr)


@dataclass(frozen=True)
class Hat:
    coeff: Coefficient
    power: int
    brackets: Tuple["Hat", ...] = ()

    @cached_property
    def key(self):
        return (self.degree, self.power, self.coeff.text(),
                tuple(b.key for b in self.brackets))

    @cached_property
    def degree(self):
        return self.power + sum(b.degree for b in self.brackets)

    @cached_property
    def lead(self):
        """Product of the coefficients of every level."""
        out = self.coeff
        for b in self.brackets:
            out = out * b.lead
        return out

    @cached_property
    def shape(self):
        return (self.power, self.brackets)

    def is_integer_valued(self):
        return self.coeff.is_integer_valued()

    def scaled(self, c):
        return make_hat(self.coeff * c, self.power, self.brackets)

    def __mul__(self, other):
        return make_hat(self.coeff * other.coeff, self.power + other.power,
                        self.brackets + other.brackets)

    def to_expr(self):
        parts = [Bracket(b.to_expr()) for b in self.brackets]
        if self.power > 0:
            parts.insert(0, Monomial(self.coeff, self.power))
            return parts[0] if len(parts) == 1 else Product(tuple(parts))
        if not parts:
            return Monomial(self.coeff, 0)
        node = parts[0] if len(parts) == 1 else Product(tuple(parts))
        return node if self.coeff == ONE else Scale(self.coeff, node)

    def text(self):
        return format_expr(self.to_expr())

    def __repr__(self):
        return f"Hat({self.text()})"


def make_hat(coeff, power, brackets=()):
    """Canonical Hat: absorbs brackets of integer-valued hats, sorts brackets."""
    coeff = as_coefficient(coeff)
    out = []
    for b in brackets:
        if b.is_integer_valued():
            coeff = coeff * b.coeff
            power += b.power
            out.extend(b.brackets)
        else:
            out.append(b)
    out.sort(key=lambda h: h.key)
    return Hat(coeff, power, tuple(out))


@dataclass(frozen=True)
class Term:
    """``c * [hat]`` when ``bracketed`` else ``c * hat``."""

    c: int
    hat: Hat
    bracketed: bool

    @property
    def degree(self):
        return self.hat.degree

    @property
    def lead(self):
        return self.hat.lead * self.c

    def is_integer_valued(self):
        return self.bracketed or self.hat.is_integer_valued()

    def negated(self):
        if self.bracketed or self.c != 1:
            return Term(-self.c, self.hat, self.bracketed)
        return term_of_hat(self.hat.scaled(-1))

    def to_expr(self):
        if self.bracketed:
            node = Bracket(self.hat.to_expr())
            return node if self.c == 1 else Scale(Coefficient.rational(self.c), node)
        node = self.hat.to_expr()
        if self.c == 1:
            return node
        if isinstance(node, Monomial):
            return Monomial(node.coeff * self.c, node.power)
        return Scale(Coefficient.rational(self.c), node)

    def text(self):
        return format_expr(self.to_expr())


def term_of_hat(h):
    """Canonical unbracketed term for a hat (real or integer-valued)."""
    if h.coeff.is_integer():
        k = int(h.coeff.as_fraction())
        if h.power == 0 and len(h.brackets) == 1:
            return Term(k, h.brackets[0], True)
        return Term(k, Hat(ONE, h.power, h.brackets), False)
    return Term(1, h, False)


def bracket_term(h, c=1):
    """``c * [h]`` in canonical form."""
    if h.is_integer_valued():
        t = term_of_hat(h)
        return Term(t.c * c, t.hat, t.bracketed) if t.c != 1 or c != 1 else t
    return Term(c, h, True)


@dataclass(frozen=True)
class SGPNormal:
    terms: Tuple[Term, ...]

    @property
    def is_zero(self):
        return not self.terms

    def is_integer_valued(self):
        return all(t.is_integer_valued() for t in self.terms)

    def raw_degree(self):
        return max((t.degree for t in self.terms), default=0)

    @cached_property
    def degree(self):
        return merge(self).raw_degree()

    def __neg__(self):
        return SGPNormal(tuple(t.negated() for t in self.terms))

    def __add__(self, other):
        return SGPNormal(self.terms + other.terms)

    def __sub__(self, other):
        return SGPNormal(self.terms + (-other).terms)

    def scaled(self, k):
        """Multiply by a nonzero integer."""
        out = []
        for t in self.terms:
            if t.bracketed or t.c != 1:
                out.append(Term(t.c * k, t.hat, t.bracketed))
            else:
                out.append(term_of_hat(t.hat.scaled(k)))
        return SGPNormal(tuple(out))

    def to_expr(self):
        if not self.terms:
            raise NotSGP("the zero expression has no tree form")
        nodes = [t.to_expr() for t in self.terms]
        return nodes[0] if len(nodes) == 1 else Sum(tuple(nodes))

    def text(self):
        return format_expr(self.to_expr()) if self.terms else "0"

    def __repr__(self):
        return f"SGPNormal({self.text()})"


def merge(p):
    """Syntactic cancellation: sum coefficients of structurally equal terms."""
    bracketed = {}
    plain = {}
    order = []
    for t in p.terms:
        if t.bracketed:
            k = ("b", t.hat)
            if t.hat not in bracketed:
                order.append(k)
                bracketed[t.hat] = 0
            bracketed[t.hat] += t.c
        else:
            k = ("p", t.hat.shape)
            if t.hat.shape not in plain:
                order.append(k)
                plain[t.hat.shape] = ZERO
            plain[t.hat.shape] = plain[t.hat.shape] + t.hat.coeff * t.c
    out = []
    for kind, key in order:
        if kind == "b":
            c = bracketed[key]
            if c:
                out.append(Term(c, key, True))
        else:
            coeff = plain[key]
            if not coeff.is_zero():
                out.append(term_of_hat(Hat(coeff, key[0], key[1])))
    return SGPNormal(tuple(out))


# --- reduction from trees ---------------------------------------------------

@dataclass
class Reduction:
    """Outcome of rewriting a tree: the normal form plus the constraint data."""

    normal: SGPNormal
    delta: Fraction = Fraction(1, 2)
    constrained: list = field(default_factory=list)   # real hats Q

    @property
    def exact(self):
        return not self.constrained


class _Reducer:
    def __init__(self):
        self.delta = Fraction(1, 2)
        self.q = []

    def hats(self, p):
        """Expand ``p`` into a list of hats whose sum equals ``p`` (given Q)."""
        if isinstance(p, Monomial):
            if p.coeff.is_zero():
                return []
            if p.power == 0:
                raise NotGP("constant monomial")
            return [make_hat(p.coeff, p.power)]
        if isinstance(p, Scale):
            return [h.scaled(p.coeff) for h in self.hats(p.child)] if not p.coeff.is_zero() else []
        if isinstance(p, Sum):
            out = []
            for c in p.children:
                out.extend(self.hats(c))
            return out
        if isinstance(p, Product):
            acc = self.hats(p.children[0])
            for c in p.children[1:]:
                right = self.hats(c)
                acc = [a * b for a in acc for b in right if not (a * b).coeff.is_zero()]
            return acc
        if isinstance(p, Bracket):
            return self.bracket(self.hats(p.child))
        raise NotGP(f"not an expression node: {p!r}")

    def bracket(self, hats):
        real = _merge_real([h for h in hats if not h.is_integer_valued()])
        if len(real) >= 2:
            self.delta = min(self.delta, Fraction(1, 2 * len(real) + 1))
            for r in real:
                if r not in self.q:
                    self.q.append(r)
        out = []
        done = False
        for h in hats:
            if h.is_integer_valued():
                out.append(h)
            elif not done:
                # bracket of each merged real hat, placed where the first real hat was
                out.extend(make_hat(ONE, 0, (r,)) for r in real)
                done = True
        return out


def _merge_real(hats):
    acc = {}
    order = []
    for h in hats:
        if h.shape not in acc:
            order.append(h.shape)
            acc[h.shape] = ZERO
        acc[h.shape] = acc[h.shape] + h.coeff
    return [Hat(acc[s], s[0], s[1]) for s in order if not acc[s].is_zero()]


def reduce_expr(p):
    """Rewrite a tree into :class:`SGPNormal` form.

    Real hats left at top level stay as unbracketed terms, so the result
    equals ``p`` (not its bracket) on the constraint set.
    """
    r = _Reducer()
    hats = r.hats(p)
    terms = tuple(term_of_hat(h) for h in hats)
    return Reduction(SGPNormal(terms), r.delta if r.q else Fraction(1, 2), list(r.q))


def as_sgp(x):
    """Accept an SGPNormal, a tree or text; trees must reduce without constraints."""
    if isinstance(x, SGPNormal):
        return x
    if isinstance(x, Hat):
        return SGPNormal((term_of_hat(x),))
    if isinstance(x, str):
        from .parse import parse
        x = parse(x)
    red = reduce_expr(x)
    if not red.exact:
        raise NotSGP(f"{format_expr(x)} needs constraints to be written in SGP form; "
                     "use normalize_to_sgp")
    return red.normal
