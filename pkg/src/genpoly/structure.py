"""Structural queries on the SGP normal form.

Degrees are taken after merging structurally equal terms.  The leading sum
of a single expression is read off the raw, unmerged term list, so opposite
terms such as ``n*[x] - n*[x]`` both count toward it; differences of two
expressions are merged first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .coeffs import ZERO, Coefficient
from .errors import Undecidable, UndecidableZero
from .intervals import DEFAULT_POLICY, CertifiedReal
from .sgp import SGPNormal, as_sgp, merge

DEFAULT_N = 1000


def degree(p):
    return as_sgp(p).degree


def leading_terms(p):
    p = as_sgp(p)
    d = p.raw_degree()
    return [t for t in p.terms if t.degree == d]


def leading_sum(p):
    """``A(p)``: sum of the coefficients of the maximal-degree terms."""
    total = ZERO
    for t in leading_terms(p):
        total = total + t.lead
    return total


def difference(p, q):
    """``p - q`` with structurally equal terms cancelled."""
    return merge(as_sgp(p) - as_sgp(q))


def equivalent(p, q):
    p, q = as_sgp(p), as_sgp(q)
    d = p.degree
    return d == q.degree and difference(p, q).degree < d


@dataclass(frozen=True)
class WeightVector:
    counts: Tuple[int, ...]

    def __post_init__(self):
        c = list(self.counts)
        while c and c[-1] == 0:
            c.pop()
        if any(x < 0 for x in c):
            raise ValueError("weights are nonnegative")
        object.__setattr__(self, "counts", tuple(c))

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    def to_json(self):
        return list(self.counts)

    def __lt__(self, other):
        return pet_less(self, other)

    def __repr__(self):
        return f"WeightVector{self.counts}"


def _counts(v):
    return v.counts if isinstance(v, WeightVector) else tuple(v)


def pet_less(u, v):
    """``u < v``: compare at the largest index where the vectors differ."""
    a, b = list(_counts(u)), list(_counts(v))
    size = max(len(a), len(b))
    a += [0] * (size - len(a))
    b += [0] * (size - len(b))
    for i in reversed(range(size)):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


def classes(P):
    """Partition ``P`` into ``~`` classes; returns lists of indices by degree."""
    P = [as_sgp(p) for p in P]
    reps = {}
    for i, p in enumerate(P):
        d = p.degree
        if d == 0:
            continue
        bucket = reps.setdefault(d, [])
        for cls in bucket:
            if equivalent(P[cls[0]], p):
                cls.append(i)
                break
        else:
            bucket.append([i])
    return reps


def weight_vector(P):
    if not P:
        raise ValueError("empty system")
    reps = classes(P)
    top = max(reps, default=0)
    return WeightVector(tuple(len(reps.get(d, [])) for d in range(1, top + 1)))


@dataclass(frozen=True)
class Nondegeneracy:
    ok: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"nondegenerate": self.ok, "witness": list(self.witness) if self.witness else None}


def is_zero_coefficient(c, policy=DEFAULT_POLICY):
    """Exact zero test on canonical forms, interval separation otherwise."""
    return c.sign(policy) == 0


def nondegenerate(P, policy=DEFAULT_POLICY):
    P = [as_sgp(p) for p in P]
    for i, p in enumerate(P):
        if is_zero_coefficient(leading_sum(p), policy):
            return Nondegeneracy(False, (i,))
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            diff = difference(P[i], P[j])
            if diff.is_zero or is_zero_coefficient(leading_sum(diff), policy):
                return Nondegeneracy(False, (i, j))
    return Nondegeneracy(True)


# --- magnitude predicates ---------------------------------------------------

def _enclosures(x, policy):
    """Yield enclosures of ``x`` at increasing precision."""
    if isinstance(x, CertifiedReal):
        yield x
        return
    if isinstance(x, (int, Fraction)):
        yield CertifiedReal.exact(x)
        return
    if isinstance(x, float):
        yield CertifiedReal.exact(Fraction(x))
        return
    if isinstance(x, Coefficient):
        for P in policy.ladder():
            yield x.enclose(P=P)
        return
    raise TypeError(f"cannot enclose {x!r}")


def _decide(pred, xs, policy, what):
    gens = [list(_enclosures(x, policy)) for x in xs]
    steps = max(len(g) for g in gens)
    for s in range(steps):
        vals = [g[min(s, len(g) - 1)] for g in gens]
        try:
            return pred(*vals)
        except Undecidable:
            continue
    raise Undecidable(f"cannot decide {what} at {policy.cap_bits} bits")


def much_greater(a, b, N=DEFAULT_N, policy=DEFAULT_POLICY):
    """``a >> b``: certifiably ``a > N*(b + 1)``."""
    return _decide(lambda x, y: x.certainly_gt(N * (y + 1)), (a, b), policy, "a >> b")


def magnitude(x, policy=DEFAULT_POLICY):
    """Enclosure of ``|x|`` tight enough to be separated from 0 when possible."""
    for e in _enclosures(x, policy):
        if e.lower > 0 or e.upper < 0 or e.is_exact:
            return abs(e)
    raise UndecidableZero(f"cannot separate {x} from 0")


def approx(a, b, N=DEFAULT_N, policy=DEFAULT_POLICY):
    """``a ~= b``: ``|a| >> |a - b|`` and ``|b| >> |a - b|``."""
    def pred(x, y):
        d = abs(x - y)
        return abs(x).certainly_gt(N * (d + 1)) and abs(y).certainly_gt(N * (d + 1))
    return _decide(pred, (a, b), policy, "a ~= b")
