"""Recursive-descent parser for the expression grammar.

Grammar (whitespace ignored)::

    sum     := term (('+' | '-') term)*
    term    := ('+' | '-')* chain
    chain   := power (('*' | '/') power)*
    power   := atom ('^' INT)?
    atom    := NUMBER | 'n' | IDENT | '(' sum ')' | '[|' sum '|]'

Constants and bare powers of ``n`` inside one product chain fold into a single
:class:`Monomial`.  A parenthesized or bracketed subexpression that involves
``n`` is kept as its own node, which is what makes ``parse(format_expr(p)) ==
p`` hold.  Constant summands and brackets of numeric constants are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .coeffs import ONE, ZERO, Coefficient, named_constant
from .errors import ConstantTermError, ExprSyntaxError
from .expr import Bracket, Monomial, Product, Scale, Sum

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<lb>\[\|)
  | (?P<rb>\|\])
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, "a token")
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind if kind != "op" else m.group(), m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


@dataclass
class _Const:
    value: Coefficient


@dataclass
class _Node:
    expr: object


class _Parser:
    def __init__(self, text, symbols):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.symbols = symbols

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self, kind=None, expected=None):
        t = self.tok
        if kind is not None and t.kind != kind:
            raise ExprSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos,
                                  expected or repr(kind))
        self.i += 1
        return t

    # sum := term (('+'|'-') term)*
    def sum(self):
        start = self.tok.pos
        terms = [self.term()]
        while self.tok.kind in "+-" and self.tok.kind != "end":
            sign = self.take().kind
            terms.append(self.term(sign == "-"))
        if len(terms) == 1:
            return terms[0]
        if all(isinstance(t, _Const) for t in terms):
            total = ZERO
            for t in terms:
                total = total + t.value
            return _Const(total)
        nodes = []
        for t in terms:
            if isinstance(t, _Const):
                if t.value.is_zero():
                    continue
                raise ConstantTermError("constant summand", start, "a term involving n")
            nodes.append(t.expr)
        return _Node(nodes[0] if len(nodes) == 1 else Sum(tuple(nodes)))

    def term(self, neg=False):
        while self.tok.kind in ("+", "-"):
            if self.take().kind == "-":
                neg = not neg
        return self.chain(-ONE if neg else ONE)

    def chain(self, c):
        k, first_n = 0, None
        factors = []

        def absorb(f, divide=False, pos=0):
            nonlocal c, k, first_n
            if divide:
                if not (isinstance(f, _Const) and f.value.is_rational()):
                    raise ExprSyntaxError("division only by a rational constant", pos,
                                          "a rational divisor")
                if f.value.is_zero():
                    raise ExprSyntaxError("division by zero", pos)
                c = c / f.value
            elif isinstance(f, _Const):
                c = c * f.value
            elif isinstance(f, tuple):  # bare n^j
                if first_n is None:
                    first_n = len(factors)
                k += f[1]
            else:
                factors.append(f.expr)

        absorb(self.power())
        while self.tok.kind in ("*", "/"):
            op = self.take().kind
            pos = self.tok.pos
            absorb(self.power(), op == "/", pos)
        if first_n is None and not factors:
            return _Const(c)
        if first_n is not None:
            factors.insert(first_n, Monomial(c, k))
            return _Node(factors[0] if len(factors) == 1 else Product(tuple(factors)))
        node = factors[0] if len(factors) == 1 else Product(tuple(factors))
        return _Node(node if c == ONE else Scale(c, node))

    def power(self):
        base = self.atom()
        if self.tok.kind != "^":
            return base
        self.take()
        t = self.take("num", "an integer exponent")
        if not t.text.isdigit():
            raise ExprSyntaxError("exponent must be a nonnegative integer", t.pos, "an integer")
        e = int(t.text)
        if isinstance(base, _Const):
            return _Const(base.value ** e)
        if isinstance(base, tuple):
            return ("n", base[1] * e)
        if e == 0:
            raise ConstantTermError("zeroth power of an expression", t.pos, "a positive exponent")
        if e == 1:
            return base
        return _Node(Product((base.expr,) * e))

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return _Const(Coefficient.rational(Fraction(t.text)))
        if t.kind == "ident":
            self.take()
            return self.identifier(t)
        if t.kind == "(":
            self.take()
            inner = self.sum()
            self.take(")", "')'")
            return inner
        if t.kind == "lb":
            self.take()
            inner = self.sum()
            self.take("rb", "'|]'")
            if isinstance(inner, _Const):
                if inner.value.is_symbolic():
                    return _Const(inner.value.bracket())
                raise ConstantTermError("bracket of a constant", t.pos, "an expression in n")
            return _Node(Bracket(inner.expr))
        raise ExprSyntaxError(f"unexpected {t.text or 'end of input'!r}", t.pos,
                              "a number, n, a constant, '(' or '[|'")

    def identifier(self, t):
        name = t.text
        if name == "n":
            return ("n", 1)
        if name in self.symbols:
            return _Const(Coefficient.symbol(name, self.symbols[name]))
        c = named_constant(name)
        if c is None:
            raise ExprSyntaxError(f"unknown identifier {name!r}", t.pos,
                                  "n, sqrt<k>, pi, e, golden or a declared symbol")
        return _Const(c)


def parse(text, symbols=(), integer_symbols=()):
    """Parse ``text`` into a GPExpr.

    ``symbols`` declares free real parameters and ``integer_symbols`` free
    integer parameters; a declared name shadows a named constant such as ``e``.
    """
    table = {s: False for s in symbols}
    table.update({s: True for s in integer_symbols})
    if "n" in table:
        raise ValueError("'n' is the variable, not a symbol")
    p = _Parser(text, table)
    v = p.sum()
    if p.tok.kind != "end":
        raise ExprSyntaxError(f"unexpected {p.tok.text!r}", p.tok.pos, "an operator or end of input")
    if isinstance(v, _Const):
        raise ConstantTermError("expression has no occurrence of n", 0, "a term involving n")
    return v.expr
