"""Transformations feeding the PET descent.

* :func:`normalize_to_sgp` rewrites a tree into SGP form plus the constraint
  set on which the rewrite is exact.
* :func:`is_good` / :func:`goodness_set` handle the ``{H(m)} != 1/2``
  conditions for every bracket level of an expression.
* :func:`shift_expand` expands ``h(n + m)`` level by level; each nested
  bracket ``[K + sum r]`` is split as ``[K] + sum [r]``, which is exact once
  every ``|{r(n)}|`` is below ``(1/2 - |{K}|) / count``.
* :func:`derivative` keeps the part of that expansion that is neither
  ``h(n)`` nor ``h(m)``.
* :func:`r_schedule`, :func:`select_shifts`, :func:`build_qij` and
  :func:`pet_step` assemble one descent step on a system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import intervals as iv
from .coeffs import ONE, ZERO, BracketAtom, Coefficient, as_coefficient
from .errors import (DescentFailure, NotGoodShift, NotSGP, PreconditionError,
                     SpacingViolation, TieUndecidable, Undecidable, UndecidableZero)
from .evaluate import compile_expr, evaluate, int_evaluator, value_exact
from .expr import format_expr, substitute_scale
from .intervals import DEFAULT_POLICY, Straddle
from .intsets import ConstraintSet
from .sgp import (Hat, SGPNormal, Term, _merge_real, as_sgp, make_hat, merge,
                  reduce_expr, term_of_hat)
from .structure import (DEFAULT_N, Nondegeneracy, WeightVector, leading_sum, magnitude,
                        much_greater, nondegenerate, pet_less, weight_vector)

DEFAULT_EPS = Fraction(1, 8)
SAFETY = Fraction(99, 100)


# --- reduction ---------------------------------------------------------------

@dataclass
class ReductionResult:
    source: object
    h: SGPNormal
    constraint: ConstraintSet
    delta: Optional[Fraction]

    def check(self, lo, hi, policy=DEFAULT_POLICY):
        """Integers of ``C ∩ [lo, hi]`` where ``p(n) != h(n)`` (certified)."""
        bad = []
        h_expr = self.h.to_expr() if not self.h.is_zero else None
        for n in self.constraint.enumerate(lo, hi, policy=policy):
            a = evaluate(self.source, n, policy)
            b = evaluate(h_expr, n, policy) if h_expr is not None else iv.CertifiedReal.exact(0)
            if a.upper < b.lower or b.upper < a.lower:
                bad.append(n)
        return bad

    def to_json(self, window=None, violations=None):
        out = {
            "source": format_expr(self.source),
            "h": self.h.text(),
            "constraint": {"delta": str(self.delta) if self.delta is not None else None,
                           "exprs": self.constraint.to_json()["exprs"]},
        }
        if window is not None:
            out["checks"] = {"window": list(window), "violations": list(violations or [])}
        return out


def normalize_to_sgp(p):
    red = reduce_expr(p)
    if red.constrained:
        C = ConstraintSet.of(red.delta, [q.to_expr() for q in red.constrained])
        return ReductionResult(p, red.normal, C, red.delta)
    return ReductionResult(p, red.normal, ConstraintSet(), None)


# --- goodness ------------------------------------------------------------------

def _nested(h, out):
    for b in h.brackets:
        if b not in out:
            out.append(b)
        _nested(b, out)


def goodness_hats(p):
    """Every real hat whose value at ``m`` gets bracketed when evaluating ``p(m)``."""
    p = as_sgp(p)
    out = []
    for t in p.terms:
        if t.bracketed and t.hat not in out:
            out.append(t.hat)
        _nested(t.hat, out)
    return out


def _half_integer(q, m, policy):
    """True when ``q(m)`` is exactly a half-integer."""
    expr = q.to_expr()
    try:
        v = value_exact(expr, m, policy)
    except TieUndecidable as exc:
        raise Undecidable(f"cannot decide whether {q.text()} at {m} is a half-integer") from exc
    if isinstance(v, (int, Fraction)):
        return Fraction(v) - iv.nearest(Fraction(v), 0) == Fraction(1, 2)
    return False


def is_good(m, p, policy=DEFAULT_POLICY):
    if m == 0:
        raise PreconditionError("m must be nonzero")
    return not any(_half_integer(q, m, policy) for q in goodness_hats(p))


def goodness_set(p, delta):
    delta = Fraction(delta)
    if not 0 < delta < Fraction(1, 4):
        raise PreconditionError("delta must lie in (0, 1/4)")
    return ConstraintSet.of(delta, [q.to_expr() for q in goodness_hats(p)])


# --- shift expansion -------------------------------------------------------------

def _bracket_const(K, fold, policy):
    if K.is_integer_valued():
        return K
    if fold:
        return K.bracket(policy)
    return Coefficient.atom(BracketAtom(K))


def _half_gap(K, policy):
    """Lower bound on ``1/2 - |{K}|``; None for symbolic K."""
    if K.is_integer_valued():
        return Fraction(1, 2)
    if K.is_symbolic():
        return None
    if K.is_rational():
        f = K.as_fraction()
        return Fraction(1, 2) - abs(f - iv.nearest(f, 0))
    for P in policy.ladder():
        v = K.fixed(P)
        try:
            m = iv.nearest(v, P)
        except Straddle:
            continue
        lo, hi = iv.fixed_to_fractions(iv.frac_of(v, m, P), P)
        gap = Fraction(1, 2) - max(abs(lo), abs(hi))
        if gap > 0:
            return gap
    return Fraction(0)


class _ShiftContext:
    def __init__(self, fold, policy):
        self.fold = fold
        self.policy = policy
        self.levels = []   # (K, reals)
        self.q = []

    def level(self, K, reals):
        if not reals:
            return
        self.levels.append((K, list(reals)))
        for r in reals:
            if r not in self.q:
                self.q.append(r)


def _is_const(h):
    return h.power == 0 and not h.brackets


def _shift(H, m, ctx):
    """``H(n + m) = K + sum(R)`` where K is constant; nested levels go to ``ctx``."""
    lists = []
    p = H.power
    pieces = []
    for j in range(p + 1):
        c = H.coeff * math.comb(p, j) * m ** (p - j)
        if not c.is_zero():
            pieces.append(make_hat(c, j))
    lists.append(pieces)
    for B in H.brackets:
        KB, RB = _shift(B, m, ctx)
        ints = [q for q in RB if q.is_integer_valued()]
        reals = _merge_real([q for q in RB if not q.is_integer_valued()])
        ctx.level(KB, reals)
        kb = _bracket_const(KB, ctx.fold, ctx.policy)
        plist = [make_hat(kb, 0)] if not kb.is_zero() else []
        plist += ints + [make_hat(ONE, 0, (r,)) for r in reals]
        lists.append(plist)
    acc = [Hat(ONE, 0, ())]
    for lst in lists:
        acc = [a * b for a in acc for b in lst]
        acc = [h for h in acc if not h.coeff.is_zero()]
    K = ZERO
    R = []
    for h in acc:
        if _is_const(h):
            K = K + h.coeff
        else:
            R.append(h)
    return K, R


def _remove_once(items, target):
    for i, x in enumerate(items):
        if x == target:
            return items[:i] + items[i + 1:], True
    return items, False


def _term_shift(t, m, ctx):
    """Return (value of this term at m, list of Terms of the remainder)."""
    H = t.hat
    K, R = _shift(H, m, ctx)
    out = []
    if t.bracketed:
        ints = [q for q in R if q.is_integer_valued()]
        reals = _merge_real([q for q in R if not q.is_integer_valued()])
        ctx.level(K, reals)
        hm = _bracket_const(K, ctx.fold, ctx.policy) * t.c
        reals, found = _remove_once(reals, H)
        if not found:
            raise AssertionError(f"identity piece missing when shifting {t.text()}")
        for q in ints:
            out.extend(SGPNormal((term_of_hat(q),)).scaled(t.c).terms)
        out.extend(Term(t.c, r, True) for r in reals)
        return hm, out
    if not H.is_integer_valued():
        raise NotSGP(f"term {t.text()} is not integer-valued")
    R, found = _remove_once(R, H)
    if not found:
        raise AssertionError(f"identity piece missing when shifting {t.text()}")
    for q in R:
        if not q.is_integer_valued():
            raise AssertionError("integer-valued hat produced a real piece")
        out.extend(SGPNormal((term_of_hat(q),)).scaled(t.c).terms)
    return K * t.c, out


@dataclass
class ShiftPart:
    m: object
    h_m: Coefficient
    terms: SGPNormal
    delta: Optional[Fraction]
    constrained: List[Hat]


@dataclass
class ShiftExpansion:
    source: SGPNormal
    parts: List[ShiftPart]
    constraint: Optional[ConstraintSet]
    delta: Optional[Fraction]
    eps: Fraction

    @property
    def certified(self):
        return self.constraint is not None


def _as_shift(m):
    if isinstance(m, Coefficient):
        return m
    if isinstance(m, int):
        if m == 0:
            raise PreconditionError("shift must be nonzero")
        return Coefficient.rational(m)
    raise TypeError(f"bad shift {m!r}")


def _expand_one(h, m, eps, fold, policy):
    mc = _as_shift(m)
    ctx = _ShiftContext(fold, policy)
    hm = ZERO
    terms = []
    for t in h.terms:
        v, rest = _term_shift(t, mc, ctx)
        hm = hm + v
        terms.extend(rest)
    delta = None
    if fold and not mc.is_symbolic():
        gaps = [_half_gap(K, policy) for K, _ in ctx.levels]
        if any(g is None for g in gaps):
            delta = None
        else:
            g = min(gaps, default=Fraction(1, 2))
            if g <= 0:
                raise NotGoodShift(m, h.text())
            L = len(ctx.q) + 1
            delta = min(g, eps) / L * SAFETY
    return ShiftPart(m, hm, SGPNormal(tuple(terms)), delta, list(ctx.q))


def shift_expand(h, shifts, eps=DEFAULT_EPS, policy=DEFAULT_POLICY, check_good=True):
    """Expansion of ``h(n + m)`` for each shift, valid on one common constraint set."""
    h = as_sgp(h)
    if not h.is_integer_valued():
        raise NotSGP("shift expansion needs an integer-valued SGP expression")
    eps = Fraction(eps)
    parts = []
    for m in shifts:
        if isinstance(m, int) and check_good and not h.is_zero and not _symbolic(h):
            if not is_good(m, h, policy):
                raise NotGoodShift(m, h.text())
        parts.append(_expand_one(h, m, eps, True, policy))
    if parts and all(p.delta is not None for p in parts):
        delta = min(p.delta for p in parts)
        q = []
        for p in parts:
            q.extend(r for r in p.constrained if r not in q)
        C = ConstraintSet.of(delta, [r.to_expr() for r in q]) if q else ConstraintSet()
        return ShiftExpansion(h, parts, C, delta if q else None, eps)
    return ShiftExpansion(h, parts, None, None, eps)


def _symbolic(h):
    return any(t.hat.lead.is_symbolic() or _hat_symbolic(t.hat) for t in h.terms)


def _hat_symbolic(H):
    return H.coeff.is_symbolic() or any(_hat_symbolic(b) for b in H.brackets)


# --- derivative ------------------------------------------------------------------

@dataclass
class Derivative:
    source: SGPNormal
    m: object
    D: SGPNormal
    certification: Optional[ConstraintSet]
    delta: Optional[Fraction]
    degree_too_low: bool
    A_D: Coefficient
    target: Coefficient
    law_symbolic: bool
    law_exact: bool
    bound: Optional[Fraction]
    magnitudes: Dict[str, str] = field(default_factory=dict)

    def check(self, lo, hi, policy=DEFAULT_POLICY):
        """Violations of ``h(n+m) - h(n) - h(m) = D(n)`` on ``C ∩ [lo, hi]``."""
        if self.certification is None or not isinstance(self.m, int):
            raise PreconditionError("window check needs a numeric, certified derivative")
        h = int_evaluator(self.source.to_expr(), policy)
        d = int_evaluator(self.D.to_expr(), policy) if not self.D.is_zero else (lambda n: 0)
        hm = h(self.m)
        return [n for n in self.certification.enumerate(lo, hi, policy=policy)
                if h(n + self.m) - h(n) - hm != d(n)]

    def to_json(self, window=None, violations=None):
        out = {
            "source": self.source.text(),
            "m": self.m if isinstance(self.m, int) else str(self.m),
            "D": self.D.text(),
            "degree_too_low": self.degree_too_low,
            "constraint": {
                "delta": str(self.delta) if self.delta is not None else None,
                "exprs": self.certification.to_json()["exprs"] if self.certification else [],
            },
            "leading": {
                "A_D": self.A_D.text(),
                "deg_m_A": self.target.text(),
                "symbolic_law": self.law_symbolic,
                "exact": self.law_exact,
                "bound": str(self.bound) if self.bound is not None else None,
            },
            "magnitudes": dict(self.magnitudes),
        }
        if window is not None:
            out["checks"] = {"window": list(window), "violations": list(violations or [])}
        return out


def _slack_bound(c, policy):
    """``max |x|`` over the slack enclosure of ``c`` (brackets widened by 1/2)."""
    if c.is_symbolic() and not _only_numeric_brackets(c):
        return None
    P = policy.start_bits
    v = c.slack_enclosure(P)
    lo, hi = iv.fixed_to_fractions(v, P) if not iv.is_exact(v) else (v, v)
    return max(abs(Fraction(lo)), abs(Fraction(hi)))


def _only_numeric_brackets(c):
    for a in c.atoms():
        if isinstance(a, BracketAtom):
            if not _only_numeric_brackets(a.inner):
                return False
        elif a.symbolic:
            return False
    return True


def derivative(h, m, eps=DEFAULT_EPS, policy=DEFAULT_POLICY):
    h = as_sgp(h)
    exp = shift_expand(h, [m], eps, policy)
    part = exp.parts[0]
    deg = h.degree
    mc = _as_shift(m)
    low = deg <= 1
    D = SGPNormal(()) if low else part.terms
    target = leading_sum(h) * mc * deg
    A_D = leading_sum(D)
    if low:
        unfolded_A = ZERO
        target = ZERO
    else:
        unf = _expand_one(h, m, exp.eps, False, policy)
        unfolded_A = leading_sum(unf.terms)
    law_symbolic = unfolded_A.unbracket() == target
    bound = None if low else _slack_bound(unfolded_A - target, policy)
    mags = {}
    for t in h.terms:
        lead = t.hat.lead
        if not lead.is_symbolic():
            mags[t.text()] = str(float(magnitude(lead, policy).mid))
    return Derivative(h, m, D, exp.constraint, exp.delta, low, A_D, target,
                      law_symbolic, A_D == target, bound, mags)


# --- r schedule and shift selection --------------------------------------------

@dataclass
class RSchedule:
    M: Fraction
    L: Fraction

    def __call__(self, n):
        return math.ceil(Fraction(10 ** 10) * self.M ** 2 / self.L ** 2 * (n + 1))

    def to_json(self):
        return {"M": float(self.M), "L": float(self.L), "r0": self(0)}


def schedule_values(P, policy=DEFAULT_POLICY):
    P = [as_sgp(p) for p in P]
    vals = [("deg", i, iv.CertifiedReal.exact(p.degree)) for i, p in enumerate(P)]
    for i, p in enumerate(P):
        vals.append(("A", i, magnitude(leading_sum(p), policy)))
    for i in range(len(P)):
        for j in range(len(P)):
            if i != j:
                d = merge(P[i] - P[j])
                vals.append(("A-diff", (i, j), magnitude(leading_sum(d), policy)))
    return vals


def r_schedule(P, policy=DEFAULT_POLICY):
    P = [as_sgp(p) for p in P]
    if any(p.degree < 2 for p in P):
        raise PreconditionError("r schedule needs degrees >= 2")
    vals = schedule_values(P, policy)
    M = max(v.upper for _, _, v in vals)
    L = min(v.lower for _, _, v in vals)
    if L <= 0:
        raise UndecidableZero("minimum of the A-values cannot be separated from 0")
    return RSchedule(M, L)


def select_shifts(P, count, r, policy=DEFAULT_POLICY):
    """Smallest admissible shifts: |k_0| > r(0), |k_j| > |k_{j-1}| + r(|k_{j-1}|)."""
    P = [as_sgp(p) for p in P]
    ks = []
    prev = 0
    for j in range(count):
        bound = r(0) if j == 0 else prev + r(prev)
        size = bound + 1
        while True:
            found = None
            for k in (size, -size):
                if all(is_good(k, p, policy) for p in P):
                    found = k
                    break
            if found is not None:
                break
            size += 1
        ks.append(found)
        prev = abs(found)
    return ks


def check_spacing(K, r):
    prev = 0
    for j, k in enumerate(K):
        bound = r(0) if j == 0 else prev + r(prev)
        if abs(k) <= bound:
            raise SpacingViolation(f"|k_{j}| = {abs(k)} must exceed {bound}")
        prev = abs(k)


# --- q_ij and the descent step ---------------------------------------------------

@dataclass
class QijResult:
    P: List[SGPNormal]
    K: List[int]
    w: int
    q: Dict[Tuple[int, int], SGPNormal]
    P_prime: List[SGPNormal]
    phi_before: WeightVector
    phi_after: WeightVector
    separation_failures: List[dict]
    certification: Optional[ConstraintSet]

    @property
    def descended(self):
        return pet_less(self.phi_after, self.phi_before)

    def to_json(self):
        return {
            "P": [p.text() for p in self.P],
            "K": list(self.K),
            "w": self.w,
            "q": [{"i": i + 1, "j": j, "q": v.text(), "degree": v.degree}
                  for (i, j), v in sorted(self.q.items())],
            "P_prime": [p.text() for p in self.P_prime],
            "phi_before": self.phi_before.to_json(),
            "phi_after": self.phi_after.to_json(),
            "descended": self.descended,
            "separation_failures": self.separation_failures,
        }


def pet_order(P):
    """Stable reorder so that the degree-1 elements come first, lowest degree first."""
    P = [as_sgp(p) for p in P]
    return sorted(P, key=lambda p: p.degree)


def _gg1(c, N, policy):
    return much_greater(magnitude(c, policy), 1, N, policy)


def build_qij(P, K, N=DEFAULT_N, eps=DEFAULT_EPS, policy=DEFAULT_POLICY, check_spacing_rule=True):
    P = [as_sgp(p) for p in P]
    if not P:
        raise PreconditionError("empty system")
    degs = [p.degree for p in P]
    w = sum(1 for d in degs if d == 1)
    if degs[:w] != [1] * w or any(d < 1 for d in degs):
        raise PreconditionError("degree-1 elements must come first; use pet_order")
    high = P[w:]
    if check_spacing_rule and high:
        check_spacing(K, r_schedule(high, policy))
    p1 = P[0]
    q = {}
    cert = None
    for i in range(w, len(P)):
        for j, k in enumerate(K):
            d = derivative(P[i], k, eps, policy)
            if d.certification is not None:
                cert = d.certification if cert is None else cert.intersect(d.certification)
            q[(i, j)] = merge(d.D + P[i] - p1) if i > 0 else merge(d.D)
    P_prime = [merge(P[i] - p1) for i in range(1, w)] + [q[key] for key in sorted(q)]
    failures = []
    keys = sorted(q)
    for key in keys:
        if not _gg1(leading_sum(q[key]), N, policy):
            failures.append({"kind": "A(q)", "pair": [list(key)]})
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            diff = merge(q[keys[a]] - q[keys[b]])
            if diff.is_zero or not _gg1(leading_sum(diff), N, policy):
                failures.append({"kind": "A(q-q')", "pair": [list(keys[a]), list(keys[b])]})
    before = weight_vector(P)
    after = weight_vector([p for p in P_prime if not p.is_zero]) if any(
        not p.is_zero for p in P_prime) else WeightVector(())
    res = QijResult(P, list(K), w, q, P_prime, before, after, failures, cert)
    if not res.descended:
        raise DescentFailure(f"weight did not descend: {after.counts} vs {before.counts}")
    return res


def pet_step(P, N=DEFAULT_N, l=0, eps=DEFAULT_EPS, policy=DEFAULT_POLICY):
    """One descent step with the smallest admissible shifts ``k_0..k_l``."""
    P = pet_order(P)
    w = sum(1 for p in P if p.degree == 1)
    high = P[w:]
    if not high:
        raise PreconditionError("system already has degree 1")
    r = r_schedule(high, policy)
    K = select_shifts(high, l + 1, r, policy)
    return build_qij(P, K, N, eps, policy)


def scale_system(P, s):
    """``p(s*n)`` for every element."""
    return [as_sgp(substitute_scale(as_sgp(p).to_expr(), s)) for p in P]


def prepare_system(P, N=DEFAULT_N, policy=DEFAULT_POLICY, max_scale=10 ** 12):
    """Smallest power-of-two ``s`` making every ``|A(p_i)|``, ``|A(p_i - p_j)|`` >> 1."""
    P = [as_sgp(p) for p in P]
    nd = nondegenerate(P, policy)
    if not nd:
        raise PreconditionError(f"system is degenerate at {nd.witness}")
    s = 1
    while s <= max_scale:
        Q = scale_system(P, s) if s > 1 else P
        vals = [leading_sum(p) for p in Q]
        vals += [leading_sum(merge(Q[i] - Q[j])) for i in range(len(Q)) for j in range(i + 1, len(Q))]
        if all(_gg1(v, N, policy) for v in vals):
            return Q, s
        s *= 2
    raise PreconditionError("no scaling up to the cap makes the leading sums large")


@dataclass
class PetRun:
    steps: List[QijResult]
    scale: int
    final: List[SGPNormal]

    @property
    def reached_degree_one(self):
        return all(p.degree <= 1 for p in self.final)

    def to_json(self):
        return {"scale": self.scale,
                "phis": [s.phi_before.to_json() for s in self.steps] +
                        ([self.steps[-1].phi_after.to_json()] if self.steps else []),
                "final": [p.text() for p in self.final],
                "reached_degree_one": self.reached_degree_one,
                "separation_failures": sum(len(s.separation_failures) for s in self.steps)}


def pet_reduce(P, N=DEFAULT_N, l=0, eps=DEFAULT_EPS, policy=DEFAULT_POLICY, max_steps=64):
    """Iterate :func:`pet_step` until every element has degree at most 1."""
    P, s = prepare_system(P, N, policy)
    steps = []
    cur = [p for p in P if not p.is_zero]
    while any(p.degree > 1 for p in cur):
        if len(steps) >= max_steps:
            raise DescentFailure("step limit reached")
        res = pet_step(cur, N, l, eps, policy)
        steps.append(res)
        cur = [p for p in res.P_prime if not p.is_zero]
    return PetRun(steps, s, cur)
