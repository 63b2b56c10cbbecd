"""Integer sets cut out by fractional-part constraints, and window statistics.

A :class:`ConstraintSet` is a finite list of ``(g, eps)`` pairs and contains
``n`` when every ``{g(n)}`` lies in ``(-eps, eps)``.  Keeping one ``eps`` per
expression makes intersection exact.

:func:`classify` summarizes a finite sorted set of integers on a window.  All
verdicts are relative to the window; nothing is claimed about the whole of
the integers.
"""

from __future__ import annotations

import bisect
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from . import intervals as iv
from .errors import PreconditionError, Undecidable, WindowTooLarge
from .evaluate import compile_expr, frac_within
from .expr import format_expr
from .intervals import DEFAULT_POLICY, Straddle

DEFAULT_WINDOW_CAP = 10 ** 7


def _as_expr(g):
    if isinstance(g, str):
        from .parse import parse
        return parse(g)
    if hasattr(g, "to_expr"):
        return g.to_expr()
    return g


@dataclass(frozen=True)
class ConstraintSet:
    items: Tuple[tuple, ...] = ()

    def __post_init__(self):
        items = []
        for g, eps in self.items:
            eps = Fraction(eps)
            if not 0 < eps <= Fraction(1, 2):
                raise PreconditionError(f"epsilon must lie in (0, 1/2], got {eps}")
            items.append((_as_expr(g), eps))
        object.__setattr__(self, "items", tuple(items))

    @classmethod
    def of(cls, eps, exprs):
        """``C(eps, g_1, ..., g_t)``."""
        return cls(tuple((g, eps) for g in exprs))

    @property
    def exprs(self):
        return [g for g, _ in self.items]

    @property
    def epsilon(self):
        return min((e for _, e in self.items), default=None)

    def __len__(self):
        return len(self.items)

    def member(self, n, policy=DEFAULT_POLICY):
        return all(frac_within(g, n, eps, policy) for g, eps in self.items)

    __contains__ = member

    def intersect(self, other):
        seen = set()
        out = []
        for it in self.items + other.items:
            if it not in seen:
                seen.add(it)
                out.append(it)
        return ConstraintSet(tuple(out))

    def enumerate(self, lo, hi, cap=DEFAULT_WINDOW_CAP, jobs=1, policy=DEFAULT_POLICY):
        return enumerate_members(self, lo, hi, cap, jobs, policy)

    def to_json(self):
        return {
            "epsilon": str(self.epsilon) if self.items else None,
            "exprs": [format_expr(g) for g in self.exprs],
            "items": [{"expr": format_expr(g), "eps": str(e)} for g, e in self.items],
        }


def _member_fn(C, policy):
    """Fast membership test at start precision with an escalating fallback."""
    P = policy.start_bits
    checks = []
    for g, eps in C.items:
        checks.append((g, eps, compile_expr(g, P), iv.to_fixed(eps, P)))

    def test(n):
        for g, eps, f, (e_lo, e_hi) in checks:
            try:
                v = f(n)
                m = iv.nearest(v, P)
            except Straddle:
                if not frac_within(g, n, eps, policy):
                    return False
                continue
            fr = iv.frac_of(v, m, P)
            if iv.is_exact(fr):
                if not -eps < fr < eps:
                    return False
                continue
            if fr[0] > -e_lo and fr[1] < e_lo:
                continue
            if fr[1] <= -e_hi or fr[0] >= e_hi:
                return False
            if not frac_within(g, n, eps, policy):
                return False
        return True
    return test


def _scan(args):
    C, lo, hi, policy = args
    test = _member_fn(C, policy)
    out = []
    for n in range(lo, hi + 1):
        try:
            ok = test(n)
        except Undecidable as exc:
            raise Undecidable(f"n={n}: {exc}") from None
        if ok:
            out.append(n)
    return out


def enumerate_members(C, lo, hi, cap=DEFAULT_WINDOW_CAP, jobs=1, policy=DEFAULT_POLICY):
    """Sorted members of ``C`` in ``[lo, hi]``."""
    if lo > hi:
        raise PreconditionError("empty window: lo > hi")
    if hi - lo > cap:
        raise WindowTooLarge(f"window [{lo}, {hi}] exceeds the cap of {cap}")
    if not C.items:
        return list(range(lo, hi + 1))
    if jobs <= 1 or hi - lo < 10000:
        return _scan((C, lo, hi, policy))
    step = (hi - lo + jobs) // jobs
    parts = [(C, a, min(a + step - 1, hi), policy) for a in range(lo, hi + 1, step)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        chunks = list(ex.map(_scan, parts))
    return [n for chunk in chunks for n in chunk]


# --- window classification -------------------------------------------------

HOLDS = "holds-on-window"
FAILS = "fails-on-window"
VACUOUS = "vacuous"


@dataclass(frozen=True)
class Verdict:
    status: str
    bound: Optional[int] = None
    witness: Optional[list] = None

    def to_json(self):
        return {"status": self.status, "bound": self.bound, "witness": self.witness}


def runs(members):
    """Maximal runs of consecutive integers as ``(start, length)`` pairs."""
    out = []
    start = prev = None
    for n in members:
        if prev is not None and n == prev + 1:
            prev = n
            continue
        if start is not None:
            out.append((start, prev - start + 1))
        start = prev = n
    if start is not None:
        out.append((start, prev - start + 1))
    return out


def gap_stats(members, lo, hi):
    """``(max_gap, widest_gap_start, head_margin, tail_margin)``."""
    max_gap, where = 0, None
    for a, b in zip(members, members[1:]):
        if b - a > max_gap:
            max_gap, where = b - a, a
    return max_gap, where, members[0] - lo, hi - members[-1]


def _syndetic(members, lo, hi, gap_limit=None):
    if not members:
        return Verdict(VACUOUS), 0
    max_gap, where, head, tail = gap_stats(members, lo, hi)
    bound = max(max_gap, head + 1, tail + 1)
    if gap_limit is not None and bound > gap_limit:
        if max_gap > gap_limit:
            witness = [where, where + max_gap]
        elif head + 1 > gap_limit:
            witness = [lo, members[0]]
        else:
            witness = [members[-1], hi]
        return Verdict(FAILS, bound, witness), max_gap
    return Verdict(HOLDS, bound), max_gap


@dataclass
class WindowReport:
    window: Tuple[int, int]
    members: List[int]
    max_gap: int
    max_run: int
    head_margin: Optional[int]
    tail_margin: Optional[int]
    probe: int
    syndetic: Verdict
    thick: Verdict
    thickly_syndetic: Verdict
    notes: list = field(default_factory=list)

    def to_json(self, include_members=True):
        out = {
            "window": list(self.window),
            "count": len(self.members),
            "max_gap": self.max_gap,
            "max_run": self.max_run,
            "head_margin": self.head_margin,
            "tail_margin": self.tail_margin,
            "probe": self.probe,
            "syndetic": self.syndetic.to_json(),
            "thick": self.thick.to_json(),
            "thickly_syndetic": self.thickly_syndetic.to_json(),
            "notes": list(self.notes),
        }
        if include_members:
            out["members"] = list(self.members)
        return out


WINDOW_NOTE = "verdicts describe the finite window only, not the set on all of Z"


def classify(members, window, L_probe=1, gap_limit=None):
    """Gap/run statistics and window-relative verdicts.

    The syndetic bound is ``max(max_gap, head + 1, tail + 1)``, so a window
    edge far from the nearest member counts against the set.  ``gap_limit``
    turns a bound above it into a failing verdict with the widest gap as
    witness.
    """
    lo, hi = window
    if lo > hi:
        raise PreconditionError("empty window")
    if L_probe < 1:
        raise PreconditionError("L_probe must be positive")
    members = sorted(set(members))
    if members and (members[0] < lo or members[-1] > hi):
        raise PreconditionError("members outside the window")
    if not members:
        v = Verdict(VACUOUS)
        return WindowReport((lo, hi), [], 0, 0, None, None, L_probe, v, v, v, [WINDOW_NOTE])

    syn, max_gap = _syndetic(members, lo, hi, gap_limit)
    rs = runs(members)
    max_run = max(length for _, length in rs)
    longest = max(rs, key=lambda r: r[1])
    if max_run >= L_probe:
        thick = Verdict(HOLDS, max_run, [longest[0], longest[0] + longest[1] - 1])
    else:
        thick = Verdict(FAILS, max_run, [longest[0], longest[0] + longest[1] - 1])

    # starts n with [n, n + L_probe] inside the set, on the shrunk window
    starts = []
    for s, length in rs:
        last = s + length - 1
        starts.extend(range(s, last - L_probe + 1))
    shrunk = (lo, hi - L_probe)
    if shrunk[0] > shrunk[1]:
        ts = Verdict(VACUOUS)
    elif not starts:
        ts = Verdict(FAILS, None, [longest[0], longest[0] + longest[1] - 1])
    else:
        ts, _ = _syndetic(starts, shrunk[0], shrunk[1], gap_limit)
    _, _, head, tail = gap_stats(members, lo, hi)
    notes = [WINDOW_NOTE]
    if shrunk[0] > shrunk[1]:
        notes.append("window shorter than the probe length")
    return WindowReport((lo, hi), members, max_gap, max_run, head, tail, L_probe,
                        syn, thick, ts, notes)


def member_index(members, n):
    i = bisect.bisect_left(members, n)
    return i < len(members) and members[i] == n
