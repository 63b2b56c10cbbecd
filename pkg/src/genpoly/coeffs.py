"""Real coefficients with certified evaluation.

A :class:`Coefficient` is a polynomial with rational coefficients in a small
set of atoms: square roots of square-free integers, ``pi``, ``e``, free
symbols and (only while symbols are involved) nearest-integer brackets of
other coefficients.  The representation is canonical, so ``==`` and ``hash``
are structural and exact.

Products of square roots are reduced (``sqrt2*sqrt6 -> 2*sqrt3``), which keeps
each monomial on the basis {sqrt(k) : k square-free}.  The golden ratio is
stored as ``1/2 + 1/2*sqrt5``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from . import intervals as iv
from .errors import SymbolicValueError, TieUndecidable, UndecidableZero
from .intervals import DEFAULT_POLICY, CertifiedReal, Straddle


def squarefree_split(k):
    """Return ``(r, s)`` with ``k == r*r*s`` and ``s`` square-free."""
    r, s = 1, 1
    d = 2
    while d * d <= k:
        while k % (d * d) == 0:
            k //= d * d
            r *= d
        if k % d == 0:
            k //= d
            s *= d
        d += 1
    return r, s * k


class Atom:
    """Base class for coefficient atoms.  Subclasses are frozen dataclasses."""

    integer = False
    symbolic = False

    @cached_property
    def key(self):
        return self._key()

    def __lt__(self, other):
        return self.key < other.key


@dataclass(frozen=True, eq=True)
class Sqrt(Atom):
    k: int

    def _key(self):
        return f"1sqrt{self.k:012d}"

    def text(self):
        return f"sqrt{self.k}"

    def fixed(self, P):
        return iv.sqrt_fixed(self.k, P)


@dataclass(frozen=True, eq=True)
class Pi(Atom):
    def _key(self):
        return "2pi"

    def text(self):
        return "pi"

    def fixed(self, P):
        return iv.pi_fixed(P)


@dataclass(frozen=True, eq=True)
class E(Atom):
    def _key(self):
        return "3e"

    def text(self):
        return "e"

    def fixed(self, P):
        return iv.e_fixed(P)


@dataclass(frozen=True, eq=True)
class Symbol(Atom):
    """A free real parameter.  ``integer=True`` marks integer-valued parameters."""

    name: str
    integer: bool = False
    symbolic = True

    def _key(self):
        return f"4{self.name}"

    def text(self):
        return self.name

    def fixed(self, P):
        raise SymbolicValueError(f"symbol {self.name!r} has no numeric value")


@dataclass(frozen=True, eq=True)
class BracketAtom(Atom):
    """``[| inner |]`` for a constant that cannot be folded (it has symbols)."""

    inner: "Coefficient"
    integer = True
    symbolic = True

    def _key(self):
        return "5[" + self.inner.text() + "]"

    def text(self):
        return f"[|{self.inner.text()}|]"

    def fixed(self, P):
        raise SymbolicValueError("symbolic bracket has no numeric value")


def _mono_key(mono):
    return tuple((a.key, e) for a, e in mono)


def _mono_mul(m1, m2):
    """Multiply two monomials; returns (rational factor, monomial)."""
    powers = {}
    for a, e in m1 + m2:
        powers[a] = powers.get(a, 0) + e
    factor = Fraction(1)
    radicand = 1
    out = []
    for a, e in powers.items():
        if isinstance(a, Sqrt):
            factor *= a.k ** (e // 2)
            if e % 2:
                radicand *= a.k
        else:
            out.append((a, e))
    if radicand > 1:
        r, s = squarefree_split(radicand)
        factor *= r
        if s > 1:
            out.append((Sqrt(s), 1))
    out.sort(key=lambda ae: ae[0].key)
    return factor, tuple(out)


class Coefficient:
    """Immutable canonical polynomial in atoms with rational coefficients."""

    def __init__(self, terms=()):
        # terms: mapping/iterable of (monomial, Fraction); normalised here
        acc = {}
        for mono, c in (terms.items() if isinstance(terms, dict) else terms):
            if c:
                acc[mono] = acc.get(mono, 0) + c
        items = [(m, Fraction(c)) for m, c in acc.items() if c]
        items.sort(key=lambda mc: _mono_key(mc[0]))
        object.__setattr__(self, "terms", tuple(items))
        object.__setattr__(self, "_hash", hash(self.terms))

    def __setattr__(self, name, value):
        raise AttributeError("Coefficient is immutable")

    # constructors
    @classmethod
    def rational(cls, x):
        x = Fraction(x)
        return cls({(): x}) if x else ZERO

    @classmethod
    def sqrt(cls, k):
        if k < 0:
            raise ValueError("sqrt of a negative integer")
        if k == 0:
            return ZERO
        r, s = squarefree_split(k)
        if s == 1:
            return cls.rational(r)
        return cls({((Sqrt(s), 1),): Fraction(r)})

    @classmethod
    def atom(cls, a):
        return cls({((a, 1),): Fraction(1)})

    @classmethod
    def symbol(cls, name, integer=False):
        return cls.atom(Symbol(name, integer))

    # algebra
    def __add__(self, other):
        other = as_coefficient(other)
        return Coefficient(list(self.terms) + list(other.terms))

    __radd__ = __add__

    def __neg__(self):
        return Coefficient([(m, -c) for m, c in self.terms])

    def __sub__(self, other):
        return self + (-as_coefficient(other))

    def __rsub__(self, other):
        return as_coefficient(other) - self

    def __mul__(self, other):
        other = as_coefficient(other)
        out = []
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                f, m = _mono_mul(m1, m2)
                out.append((m, c1 * c2 * f))
        return Coefficient(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_coefficient(other)
        if not other.is_rational():
            raise ValueError("division only by nonzero rationals")
        q = other.as_fraction()
        if q == 0:
            raise ZeroDivisionError("coefficient division by zero")
        return Coefficient([(m, c / q) for m, c in self.terms])

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        r = ONE
        for _ in range(k):
            r = r * self
        return r

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Coefficient.rational(other)
        if not isinstance(other, Coefficient):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return self._hash

    # predicates
    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return all(not m for m, _ in self.terms)

    def as_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self.text()} is not rational")
        return self.terms[0][1] if self.terms else Fraction(0)

    def is_integer(self):
        """Exactly a rational integer."""
        return self.is_rational() and self.as_fraction().denominator == 1

    def is_integer_valued(self):
        """Takes an integer value for every value of its integer symbols."""
        return all(c.denominator == 1 and all(a.integer for a, _ in m)
                   for m, c in self.terms)

    @cached_property
    def _atoms(self):
        return frozenset(a for m, _ in self.terms for a, _ in m)

    def atoms(self):
        return self._atoms

    def is_symbolic(self):
        return any(a.symbolic for a in self._atoms)

    def free_symbols(self):
        out = set()
        for a in self._atoms:
            if isinstance(a, Symbol):
                out.add(a.name)
            elif isinstance(a, BracketAtom):
                out |= a.inner.free_symbols()
        return out

    # evaluation
    def fixed(self, P):
        """Exact Fraction, or a fixed-point enclosure at ``P`` bits."""
        return _coeff_fixed(self, P)

    def enclose(self, policy=DEFAULT_POLICY, P=None):
        P = P or policy.start_bits
        return CertifiedReal.from_value(self.fixed(P), P)

    def sign(self, policy=DEFAULT_POLICY):
        """-1, 0 or 1.  Exact for canonical zero; interval-separated otherwise.

        Symbolic (non-numeric) nonzero coefficients are reported as generic
        nonzero, with sign 1.
        """
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.as_fraction() > 0 else -1
        if self.is_symbolic():
            return 1
        for P in policy.ladder():
            lo, hi = self.fixed(P)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
        raise UndecidableZero(f"cannot separate {self.text()} from 0")

    def bracket(self, policy=DEFAULT_POLICY):
        """Nearest integer of a constant; symbolic constants stay as atoms."""
        if self.is_integer_valued():
            return self
        if self.is_rational():
            return Coefficient.rational(iv.nearest(self.as_fraction(), 0))
        if self.is_symbolic():
            return Coefficient.atom(BracketAtom(self))
        for P in policy.ladder():
            try:
                return Coefficient.rational(iv.nearest(self.fixed(P), P))
            except Straddle:
                continue
        raise TieUndecidable(f"cannot decide [|{self.text()}|]")

    def unbracket(self):
        """Replace every symbolic bracket atom by its (unbracketed) content."""
        out = ZERO
        for m, c in self.terms:
            t = Coefficient.rational(c)
            for a, e in m:
                base = a.inner.unbracket() if isinstance(a, BracketAtom) else Coefficient.atom(a)
                t = t * base ** e
            out = out + t
        return out

    def slack_enclosure(self, P):
        """Interval containing both the value and the unbracketed value.

        Each bracket atom ``[|x|]`` is replaced by ``[x - 1/2, x + 1/2]``;
        requires all remaining atoms to be numeric.
        """
        total = 0
        for m, c in self.terms:
            t = c
            for a, e in m:
                if isinstance(a, BracketAtom):
                    inner = a.inner.slack_enclosure(P)
                    half = 1 << (P - 1)
                    base = (inner[0] - half, inner[1] + half)
                else:
                    base = a.fixed(P)
                t = iv.mul(t, iv.power(base, e, P), P)
            total = iv.add(total, t, P)
        if iv.is_exact(total):
            return iv.to_fixed(total, P)
        return total

    # text
    def text(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            factors = []
            if c != 1 or not m:
                factors.append(str(c))
            for a, e in m:
                factors.append(a.text() if e == 1 else f"{a.text()}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def paren_text(self):
        t = self.text()
        return f"({t})" if len(self.terms) > 1 else t

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"Coefficient({self.text()!r})"


@lru_cache(maxsize=8192)
def _coeff_fixed(c, P):
    if c.is_rational():
        f = c.as_fraction()
        return int(f) if f.denominator == 1 else f
    total = 0
    for m, q in c.terms:
        t = int(q) if q.denominator == 1 else q
        for a, e in m:
            t = iv.mul(t, iv.power(a.fixed(P), e, P), P)
        total = iv.add(total, t, P)
    return total


def as_coefficient(x):
    if isinstance(x, Coefficient):
        return x
    if isinstance(x, (int, Fraction)):
        return Coefficient.rational(x)
    if isinstance(x, str):
        return Coefficient.rational(Fraction(x))
    raise TypeError(f"cannot make a coefficient from {x!r}")


ZERO = Coefficient()
ONE = Coefficient({(): Fraction(1)})

PI = Coefficient.atom(Pi())
EULER = Coefficient.atom(E())
GOLDEN = (ONE + Coefficient.sqrt(5)) / 2


NAMED_CONSTANTS = {"pi": PI, "e": EULER, "golden": GOLDEN}


def named_constant(name):
    """Resolve ``pi``, ``e``, ``golden`` or ``sqrt<k>``; None if unknown."""
    if name in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[name]
    if name.startswith("sqrt") and name[4:].isdigit():
        return Coefficient.sqrt(int(name[4:]))
    return None


def is_perfect_square(k):
    return k >= 0 and math.isqrt(k) ** 2 == k
