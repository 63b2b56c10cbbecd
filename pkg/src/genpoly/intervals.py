"""Fixed-point interval arithmetic.

Internally an enclosure at precision ``P`` is a pair of Python ints ``(lo, hi)``
standing for ``[lo / 2**P, hi / 2**P]``.  Exact values (``int`` or
``Fraction``) are kept exact for as long as possible and only widened to a
fixed-point pair when they meet an irrational operand.

:class:`CertifiedReal` is the public, Fraction-endpoint form handed back to
callers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath.libmp import mpf_e, mpf_pi

from .errors import TieUndecidable, Undecidable

HALF = Fraction(1, 2)

DEFAULT_START_BITS = 128
DEFAULT_CAP_BITS = 4096


@dataclass(frozen=True)
class PrecisionPolicy:
    """Start precision and doubling cap for certified decisions."""

    start_bits: int = DEFAULT_START_BITS
    cap_bits: int = DEFAULT_CAP_BITS

    def __post_init__(self):
        if self.start_bits < 8 or self.cap_bits < self.start_bits:
            raise ValueError("need 8 <= start_bits <= cap_bits")

    def ladder(self):
        p = self.start_bits
        while p <= self.cap_bits:
            yield p
            p *= 2

    @classmethod
    def from_env(cls):
        cap = int(os.environ.get("GENPOLY_PRECISION_CAP", DEFAULT_CAP_BITS))
        return cls(start_bits=min(DEFAULT_START_BITS, cap), cap_bits=cap)


DEFAULT_POLICY = PrecisionPolicy()


class Straddle(Exception):
    """Raised inside a fixed-precision pass when a decision needs more bits."""

    def __init__(self, node=None):
        self.node = node


# --- exact <-> fixed-point conversions -------------------------------------

def to_fixed(x, P):
    """Enclose an exact rational as a fixed-point pair."""
    if isinstance(x, int):
        v = x << P
        return v, v
    num, den = x.numerator, x.denominator
    q, r = divmod(num << P, den)
    return (q, q) if r == 0 else (q, q + 1)


def fixed_to_fractions(iv, P):
    d = 1 << P
    return Fraction(iv[0], d), Fraction(iv[1], d)


def is_exact(v):
    return isinstance(v, (int, Fraction))


def add(a, b, P):
    if is_exact(a) and is_exact(b):
        return a + b
    if is_exact(a):
        a = to_fixed(a, P)
    if is_exact(b):
        b = to_fixed(b, P)
    return a[0] + b[0], a[1] + b[1]


def neg(a):
    if is_exact(a):
        return -a
    return -a[1], -a[0]


def mul(a, b, P):
    if is_exact(a) and is_exact(b):
        return a * b
    if isinstance(a, int):
        a, b = b, a
    if isinstance(b, int):
        # interval times an exact integer: no rescaling, stays exact-width
        if b >= 0:
            return a[0] * b, a[1] * b
        return a[1] * b, a[0] * b
    if isinstance(a, Fraction):
        a = to_fixed(a, P)
    if isinstance(b, Fraction):
        b = to_fixed(b, P)
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(p) >> P, -((-max(p)) >> P)


def power(a, k, P):
    r = 1
    for _ in range(k):
        r = mul(r, a, P)
    return r


def nearest(v, P):
    """Nearest integer with ties to the smaller one: ceil(v - 1/2)."""
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return -math.floor(HALF - v)
    half = 1 << (P - 1)
    m_lo = -((half - v[0]) >> P)
    m_hi = -((half - v[1]) >> P)
    if m_lo != m_hi:
        raise Straddle()
    return m_lo


def frac_of(v, m, P):
    if is_exact(v):
        return v - m
    s = m << P
    return v[0] - s, v[1] - s


# --- named constants -----------------------------------------------------

def _mpf_to_fixed(t, P, ceil):
    sign, man, exp, _ = t
    if sign:
        man = -man
    s = exp + P
    if s >= 0:
        return man << s
    if ceil:
        return -((-man) >> -s)
    return man >> -s


def _mp_bounds(fn, P):
    g = P + 16
    lo = _mpf_to_fixed(fn(g, "f"), g, False) - 2
    hi = _mpf_to_fixed(fn(g, "c"), g, True) + 2
    return int(lo >> 16), int(-((-hi) >> 16))


@lru_cache(maxsize=256)
def pi_fixed(P):
    return _mp_bounds(mpf_pi, P)


@lru_cache(maxsize=256)
def e_fixed(P):
    return _mp_bounds(mpf_e, P)


@lru_cache(maxsize=1024)
def sqrt_fixed(k, P):
    t = k << (2 * P)
    s = math.isqrt(t)
    return (s, s) if s * s == t else (s, s + 1)


# --- public enclosure -----------------------------------------------------

@dataclass(frozen=True)
class CertifiedReal:
    """A closed interval ``[lower, upper]`` known to contain a real value."""

    lower: Fraction
    upper: Fraction
    precision_bits: int = 0

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower > upper")

    @classmethod
    def exact(cls, x, precision_bits=0):
        x = Fraction(x)
        return cls(x, x, precision_bits)

    @classmethod
    def from_value(cls, v, P):
        if is_exact(v):
            return cls.exact(v, P)
        lo, hi = fixed_to_fractions(v, P)
        return cls(lo, hi, P)

    @property
    def is_exact(self):
        return self.lower == self.upper

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def mid(self):
        return (self.lower + self.upper) / 2

    def __float__(self):
        return float(self.mid)

    def contains(self, x):
        return self.lower <= x <= self.upper

    def subset_of(self, other):
        return other.lower <= self.lower and self.upper <= other.upper

    def _coerce(self, other):
        if isinstance(other, CertifiedReal):
            return other
        return CertifiedReal.exact(other)

    def __add__(self, other):
        o = self._coerce(other)
        return CertifiedReal(self.lower + o.lower, self.upper + o.upper,
                             max(self.precision_bits, o.precision_bits))

    __radd__ = __add__

    def __neg__(self):
        return CertifiedReal(-self.upper, -self.lower, self.precision_bits)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        p = (self.lower * o.lower, self.lower * o.upper,
             self.upper * o.lower, self.upper * o.upper)
        return CertifiedReal(min(p), max(p), max(self.precision_bits, o.precision_bits))

    __rmul__ = __mul__

    def __abs__(self):
        if self.lower >= 0:
            return self
        if self.upper <= 0:
            return -self
        return CertifiedReal(Fraction(0), max(-self.lower, self.upper), self.precision_bits)

    def certainly_gt(self, other):
        """True/False when decided, raise :class:`Undecidable` on overlap."""
        o = self._coerce(other)
        if self.lower > o.upper:
            return True
        if self.upper <= o.lower:
            return False
        raise Undecidable(f"cannot order [{float(self.lower)}, {float(self.upper)}] "
                          f"against [{float(o.lower)}, {float(o.upper)}]")

    def __repr__(self):
        if self.is_exact:
            return f"CertifiedReal({self.lower})"
        return (f"CertifiedReal([{float(self.lower)!r}, {float(self.upper)!r}], "
                f"{self.precision_bits} bits)")


def nearest_integer(x):
    """Nearest integer to ``x`` with ties to the smaller integer.

    ``x`` may be an ``int``, ``Fraction``, ``float`` (taken exactly) or a
    :class:`CertifiedReal`.  An enclosure that straddles a half-integer raises
    :class:`TieUndecidable`; callers retry at higher precision.
    """
    if isinstance(x, CertifiedReal):
        m_lo = nearest(x.lower, 0)
        m_hi = nearest(x.upper, 0)
        if m_lo != m_hi:
            raise TieUndecidable(f"enclosure {x!r} straddles a half-integer")
        return m_lo
    if isinstance(x, float):
        x = Fraction(x)
    return nearest(x, 0)


def fractional_part(x):
    """``{x} = x - [x]`` in (-1/2, 1/2]."""
    m = nearest_integer(x)
    if isinstance(x, CertifiedReal):
        return x - m
    return Fraction(x) - m
