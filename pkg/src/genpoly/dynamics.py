"""Concrete systems and the recurrence harness.

Three systems are provided:

* the Chacon subshift, through one two-sided point built by nesting blocks
  ``B_{k+1} = B_k B_k 1 B_k`` around the origin (weakly mixing and minimal);
* the full shift on ``a`` symbols, through a pseudo-random point generated by
  a splitmix64 hash of the position (weakly mixing, not minimal);
* a circle rotation ``x -> x + alpha`` (minimal, not weakly mixing).

Two-sided Chacon point.  Level ``k`` occupies ``[s_k, s_k + len_k)`` with
``s_0 = 0``, ``len_0 = 1``; the level-``k`` block is the *middle* copy inside
level ``k + 1``, so ``s_{k+1} = s_k - len_k`` and ``len_{k+1} = 3 len_k + 1``.
Position 0 carries the single symbol of ``B_0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import intervals as iv
from .coeffs import ZERO, Coefficient, as_coefficient
from .errors import (CapExceeded, LevelTooLarge, PreconditionError, ResolutionTooFine,
                     Undecidable, WindowTooLarge)
from .evaluate import int_evaluator
from .expr import format_expr
from .intervals import DEFAULT_POLICY, CertifiedReal
from .intsets import ConstraintSet, classify
from .structure import nondegenerate

DEFAULT_LEVEL_CAP = 16
DEFAULT_HORIZON = 10 ** 5
MAX_DIM = 3
MAX_DEPTH = 6
MAX_GRID = 64
DEFAULT_WINDOW_CAP = 10 ** 7
BASE_LEVEL = 12


# --- Chacon words ------------------------------------------------------------------

def chacon_length(level):
    return (3 ** (level + 1) - 1) // 2


def chacon_block(level, cap=DEFAULT_LEVEL_CAP):
    """The word ``B_level`` as a string of '0'/'1'."""
    if level < 0:
        raise PreconditionError("level must be nonnegative")
    if level > cap:
        raise LevelTooLarge(f"level {level} exceeds the cap {cap} "
                            f"(length would be {chacon_length(level)})")
    return "".join(map(str, _block_array(level)))


@lru_cache(maxsize=None)
def _block_array(level):
    b = np.zeros(1, dtype=np.uint8)
    for _ in range(level):
        b = np.concatenate([b, b, np.ones(1, dtype=np.uint8), b])
    b.setflags(write=False)
    return b


def _chacon_start(level):
    s, length = 0, 1
    for _ in range(level):
        s, length = s - length, 3 * length + 1
    return s


def _level_for(lo, hi):
    level, s, length = 0, 0, 1
    while not (s <= lo and hi < s + length):
        s, length = s - length, 3 * length + 1
        level += 1
    return level, s


def chacon_chars(positions):
    """Symbols of the two-sided Chacon point at the given positions."""
    pos = np.asarray(positions, dtype=np.int64)
    if pos.size == 0:
        return np.zeros(0, dtype=np.uint8)
    level, s = _level_for(int(pos.min()), int(pos.max()))
    base = _block_array(min(BASE_LEVEL, level))
    o = pos - s
    ones = np.zeros(pos.shape, dtype=bool)
    for k in range(level, BASE_LEVEL, -1):
        L = chacon_length(k - 1)
        o = np.where(o >= L, o - L, o)           # second copy -> first
        mid = (o == L)                           # was 2L before shift
        ones |= mid
        o = np.where(o > L, o - L - 1, o)        # third copy
        o = np.where(mid, 0, o)
    out = base[o]
    out[ones] = 1
    return out


def chacon_char(i):
    return int(chacon_chars([i])[0])


def chacon_language(k, level=8):
    """Words of length ``k`` occurring in ``B_level``."""
    b = chacon_block(level, cap=max(level, DEFAULT_LEVEL_CAP))
    return sorted({b[i:i + k] for i in range(len(b) - k + 1)})


# --- full shift point ---------------------------------------------------------------

_MASK = (1 << 64) - 1


def _splitmix(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def fullshift_chars(positions, alphabet=2, seed=0):
    pos = np.asarray(positions, dtype=np.int64)
    with np.errstate(over="ignore"):
        z = pos.astype(np.uint64) ^ np.uint64(_splitmix(seed))
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z % np.uint64(alphabet)).astype(np.uint8)


# --- systems and open sets -----------------------------------------------------------

@dataclass(frozen=True)
class SymbolicSystem:
    kind: str                           # "chacon", "full-shift", "rotation"
    alphabet: int = 2
    alpha: Optional[Coefficient] = None
    x0: Coefficient = ZERO
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("chacon", "full-shift", "rotation"):
            raise PreconditionError(f"unknown system {self.kind!r}")
        if self.kind == "rotation" and self.alpha is None:
            raise PreconditionError("rotation needs alpha")
        if self.kind == "full-shift" and self.alphabet < 2:
            raise PreconditionError("alphabet needs at least two symbols")

    @classmethod
    def chacon(cls):
        return cls("chacon")

    @classmethod
    def full_shift(cls, alphabet=2, seed=0):
        return cls("full-shift", alphabet=alphabet, seed=seed)

    @classmethod
    def rotation(cls, alpha, x0=0):
        return cls("rotation", alpha=as_coefficient(alpha), x0=as_coefficient(x0))

    @property
    def is_subshift(self):
        return self.kind != "rotation"

    def chars(self, positions):
        if self.kind == "chacon":
            return chacon_chars(positions)
        if self.kind == "full-shift":
            return fullshift_chars(positions, self.alphabet, self.seed)
        raise PreconditionError("rotation has no symbols")

    def word(self, start, k):
        return "".join(map(str, self.chars(np.arange(start, start + k, dtype=np.int64))))

    def language(self, k):
        if self.kind == "chacon":
            return chacon_language(k)
        if self.kind == "full-shift":
            return ["".join(w) for w in itertools.product(
                [str(a) for a in range(self.alphabet)], repeat=k)]
        raise PreconditionError("rotation has no language")

    def describe(self):
        if self.kind == "rotation":
            return {"kind": "rotation", "alpha": self.alpha.text(), "x0": self.x0.text()}
        if self.kind == "full-shift":
            return {"kind": "full-shift", "alphabet": self.alphabet, "seed": self.seed}
        return {"kind": "chacon"}


@dataclass(frozen=True)
class Cylinder:
    word: str

    def __post_init__(self):
        if not self.word:
            raise PreconditionError("empty cylinder word")


@dataclass(frozen=True)
class Arc:
    center: Fraction
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", Fraction(self.center))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if not 0 < self.radius < Fraction(1, 4):
            raise PreconditionError("arc radius must lie in (0, 1/4)")


def check_open_set(sys, U):
    if sys.is_subshift:
        if not isinstance(U, Cylinder):
            raise PreconditionError("subshift open sets are cylinders")
        if any(ch not in "0123456789"[:sys.alphabet] for ch in U.word):
            raise PreconditionError(f"word {U.word!r} uses symbols outside the alphabet")
        if sys.kind == "chacon" and U.word not in chacon_language(len(U.word), 10):
            raise PreconditionError(f"word {U.word!r} does not occur in the Chacon language")
    elif not isinstance(U, Arc):
        raise PreconditionError("rotation open sets are arcs")


# --- orbit tuples ----------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftedPoint:
    """The point ``T^offset x`` of a subshift."""

    system: SymbolicSystem
    offset: int

    def word(self, k, start=0):
        return self.system.word(self.offset + start, k)


def _rotation_coordinate(sys, m, policy=DEFAULT_POLICY):
    c = sys.x0 + sys.alpha * m
    for P in policy.ladder():
        v = c.fixed(P)
        if iv.is_exact(v):
            f = Fraction(v)
            return CertifiedReal.exact(f - (f.numerator // f.denominator))
        lo_i, hi_i = v[0] >> P, v[1] >> P
        if lo_i == hi_i:
            base = lo_i << P
            return CertifiedReal.from_value((v[0] - base, v[1] - base), P)
    raise Undecidable(f"rotation coordinate at time {m} straddles 0")


def _poly_values(polys, n_values, policy=DEFAULT_POLICY):
    out = []
    for p in polys:
        f = int_evaluator(p, policy)
        out.append([f(n) for n in n_values])
    return out


def orbit_tuple(sys, polys, n, policy=DEFAULT_POLICY):
    """``(T^{p_1(n)} x, ..., T^{p_d(n)} x)`` for the system's base point."""
    vals = [int_evaluator(p, policy)(n) for p in polys]
    if sys.is_subshift:
        return tuple(ShiftedPoint(sys, v) for v in vals)
    return tuple(_rotation_coordinate(sys, v, policy) for v in vals)


# --- hitting times ---------------------------------------------------------------------

def _arc_gap(sys, U, V, m, policy=DEFAULT_POLICY):
    """Certified ``|| c_U + m alpha - c_V ||``."""
    c = as_coefficient(U.center) - as_coefficient(V.center) + sys.alpha * m
    for P in policy.ladder():
        v = c.fixed(P)
        try:
            k = iv.nearest(v, P)
        except iv.Straddle:
            continue
        f = iv.frac_of(v, k, P)
        return abs(CertifiedReal.from_value(f, P))
    raise Undecidable(f"cannot place the rotation at time {m}")


def _arcs_meet(sys, U, Vs, ms, policy=DEFAULT_POLICY):
    """Whether ``U ∩ T^{-m_1} V_1 ∩ ...`` is nonempty for a rotation."""
    for P in policy.ladder():
        lows = [Fraction(-U.radius)]
        highs = [Fraction(U.radius)]
        ok = True
        for V, m in zip(Vs, ms):
            c = as_coefficient(V.center) - as_coefficient(U.center) - sys.alpha * m
            v = c.fixed(P)
            try:
                k = iv.nearest(v, P)
            except iv.Straddle:
                ok = False
                break
            f = CertifiedReal.from_value(iv.frac_of(v, k, P), P)
            lows.append((f.lower - V.radius, f.upper - V.radius))
            highs.append((f.lower + V.radius, f.upper + V.radius))
        if not ok:
            continue
        lo_best = max(x if not isinstance(x, tuple) else x[1] for x in lows)
        lo_worst = max(x if not isinstance(x, tuple) else x[0] for x in lows)
        hi_best = min(x if not isinstance(x, tuple) else x[0] for x in highs)
        hi_worst = min(x if not isinstance(x, tuple) else x[1] for x in highs)
        if lo_best < hi_best:
            return True
        if lo_worst >= hi_worst:
            return False
    raise Undecidable("arc intersection undecidable at the precision cap")


def _words_compatible(words_at):
    """Whether words placed at offsets agree wherever they overlap."""
    cells = {}
    for off, w in words_at:
        for j, ch in enumerate(w):
            if cells.setdefault(off + j, ch) != ch:
                return False
    return True


class _OccurrenceSearch:
    """Find a position ``i`` in ``[0, H)`` where ``u`` occurs at ``i`` and each
    ``v_j`` occurs at ``i + m_j`` in the base point."""

    def __init__(self, sys, u, horizon):
        self.sys = sys
        self.u = u
        self.horizon = horizon
        x = sys.chars(np.arange(0, horizon + len(u), dtype=np.int64))
        pat = np.frombuffer(u.encode(), dtype=np.uint8) - ord("0")
        hits = np.ones(horizon, dtype=bool)
        for j, c in enumerate(pat):
            hits &= x[j:j + horizon] == c
        self.occ = np.nonzero(hits)[0].astype(np.int64)

    def found(self, vs, ms):
        cand = self.occ
        for v, m in zip(vs, ms):
            if cand.size == 0:
                return False
            for j, ch in enumerate(v):
                cand = cand[self.sys.chars(cand + (m + j)) == int(ch)]
                if cand.size == 0:
                    return False
        return cand.size > 0


@dataclass
class HittingResult:
    hits: List[int]
    not_found: List[int]
    exact: bool
    horizon: Optional[int]

    def to_json(self):
        return {"hits": self.hits, "not_found_within_horizon": self.not_found,
                "exact": self.exact, "horizon": self.horizon}


def _window_values(window, cap):
    lo, hi = window
    if lo > hi:
        raise PreconditionError("empty window")
    if hi - lo > cap:
        raise WindowTooLarge(f"window [{lo}, {hi}] exceeds the cap {cap}")
    return list(range(lo, hi + 1))


def multi_hitting(sys, U, Vs, polys, window, horizon=DEFAULT_HORIZON,
                  cap=DEFAULT_WINDOW_CAP, policy=DEFAULT_POLICY):
    """``{n : U ∩ T^{-p_1(n)} V_1 ∩ ... ≠ ∅}`` on a window."""
    if len(Vs) != len(polys):
        raise PreconditionError("one target set per polynomial")
    for S in (U, *Vs):
        check_open_set(sys, S)
    ns = _window_values(window, cap)
    vals = _poly_values(polys, ns, policy)
    hits, missing = [], []
    if sys.kind == "rotation":
        for idx, n in enumerate(ns):
            if _arcs_meet(sys, U, Vs, [col[idx] for col in vals], policy):
                hits.append(n)
        return HittingResult(hits, [], True, None)
    if sys.kind == "full-shift":
        for idx, n in enumerate(ns):
            placed = [(0, U.word)] + [(col[idx], V.word) for col, V in zip(vals, Vs)]
            if _words_compatible(placed):
                hits.append(n)
        return HittingResult(hits, [], True, None)
    search = _OccurrenceSearch(sys, U.word, horizon)
    words = [V.word for V in Vs]
    for idx, n in enumerate(ns):
        ms = [col[idx] for col in vals]
        if search.found(words, ms):
            hits.append(n)
        else:
            missing.append(n)
    return HittingResult(hits, missing, False, horizon)


def hitting_times(sys, U, V, p, window, horizon=DEFAULT_HORIZON,
                  cap=DEFAULT_WINDOW_CAP, policy=DEFAULT_POLICY):
    """``N(p, U, V) = {n : U ∩ T^{-p(n)} V ≠ ∅}`` on a window."""
    return multi_hitting(sys, U, [V], [p], window, horizon, cap, policy)


# --- density coverage ------------------------------------------------------------------

@dataclass
class DensityReport:
    polys: List[str]
    system: dict
    resolution: int
    window: Tuple[int, int]
    boxes_total: int
    boxes_hit: int
    missing: List[list]
    checkpoints: List[Tuple[int, float]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def coverage(self):
        return self.boxes_hit / self.boxes_total

    @property
    def monotone(self):
        cov = [c for _, c in self.checkpoints]
        return all(a <= b for a, b in zip(cov, cov[1:]))

    def to_json(self):
        return {
            "polys": self.polys,
            "system": self.system,
            "resolution": self.resolution,
            "window": list(self.window),
            "boxes_total": self.boxes_total,
            "boxes_hit": self.boxes_hit,
            "coverage": self.coverage,
            "missing": self.missing,
            "checkpoints": [{"window_hi": r, "coverage": c} for r, c in self.checkpoints],
            "monotone": self.monotone,
            "notes": self.notes,
        }

    def to_csv(self):
        lines = ["window_hi,coverage"]
        lines += [f"{r},{c!r}" for r, c in self.checkpoints]
        return "\n".join(lines) + "\n"


def scan_order(lo, hi):
    """Integers of ``[lo, hi]`` ordered by distance from 0 (ties: positive first)."""
    out = []
    top = max(abs(lo), abs(hi))
    for r in range(0, top + 1):
        for n in ((r, -r) if r else (0,)):
            if lo <= n <= hi:
                out.append(n)
    return out


def _subshift_codes(sys, vals, k):
    """Per-coordinate word codes (base-alphabet integers) for offsets ``vals``."""
    a = sys.alphabet
    vals = np.asarray(vals, dtype=np.int64)
    codes = np.zeros(vals.shape, dtype=np.int64)
    for j in range(k):
        codes = codes * a + sys.chars(vals + j).astype(np.int64)
    return codes


def _rotation_cells(sys, vals, G, policy=DEFAULT_POLICY):
    P = policy.start_bits
    one = 1 << P
    a_lo, a_hi = as_fixed_pair(sys.alpha, P)
    x_lo, x_hi = as_fixed_pair(sys.x0, P)
    cells = []
    for m in vals:
        if m >= 0:
            lo, hi = x_lo + m * a_lo, x_hi + m * a_hi
        else:
            lo, hi = x_lo + m * a_hi, x_hi + m * a_lo
        c_lo = ((lo % one) * G) >> P if (lo >> P) == (hi >> P) else None
        c_hi = ((hi % one) * G) >> P
        if c_lo is None or c_lo != c_hi:
            coord = _rotation_coordinate(sys, m, policy)
            c_lo = int(coord.lower * G)
            if int(coord.upper * G) != c_lo:
                raise Undecidable(f"orbit point at time {m} sits on a grid line")
        cells.append(c_lo)
    return np.asarray(cells, dtype=np.int64)


def as_fixed_pair(c, P):
    v = c.fixed(P)
    return iv.to_fixed(v, P) if iv.is_exact(v) else v


def density_coverage(sys, polys, resolution, window, checkpoints=None, missing_sample=10,
                     cap=DEFAULT_WINDOW_CAP, policy=DEFAULT_POLICY, check_nondegenerate=True):
    """Fraction of admissible product boxes visited by the orbit tuple on a window.

    Times are scanned outward from 0, so the coverage recorded at each
    checkpoint radius is that of the nested window ``[-R, R] ∩ window``.
    """
    d = len(polys)
    if not 1 <= d <= MAX_DIM:
        raise CapExceeded(f"dimension {d} outside 1..{MAX_DIM}")
    if check_nondegenerate:
        from .sgp import as_sgp
        nd = nondegenerate([as_sgp(p) for p in polys], policy)
        if not nd:
            raise PreconditionError(f"polynomials are degenerate at {nd.witness}")
    lo, hi = window
    if hi - lo > cap:
        raise WindowTooLarge(f"window [{lo}, {hi}] exceeds the cap {cap}")
    if sys.is_subshift:
        if not 1 <= resolution <= MAX_DEPTH:
            raise ResolutionTooFine(f"cylinder depth {resolution} outside 1..{MAX_DEPTH}")
        words = sys.language(resolution)
        index = {}
        for w in words:
            code = 0
            for ch in w:
                code = code * sys.alphabet + int(ch)
            index[code] = len(index)
        per_axis = len(words)
    else:
        if not 2 <= resolution <= MAX_GRID:
            raise ResolutionTooFine(f"grid size {resolution} outside 2..{MAX_GRID}")
        per_axis = resolution
    total = per_axis ** d

    order = np.asarray(scan_order(lo, hi), dtype=np.int64)
    vals = _poly_values(polys, order.tolist(), policy)
    box = np.zeros(order.shape, dtype=np.int64)
    for col in vals:
        if sys.is_subshift:
            if max(abs(v) for v in col) > 2 ** 60:
                raise CapExceeded("orbit offsets exceed the 64-bit lookup range")
            codes = _subshift_codes(sys, col, resolution)
            lookup = np.vectorize(lambda c: index.get(int(c), -1), otypes=[np.int64])
            axis = lookup(codes) if codes.size else codes
            if (axis < 0).any():
                raise AssertionError("orbit produced a word outside the language")
        else:
            axis = _rotation_cells(sys, col, resolution, policy)
        box = box * per_axis + axis

    first = np.full(total, -1, dtype=np.int64)
    uniq, pos = np.unique(box, return_index=True)
    first[uniq] = pos
    radius = np.abs(order)
    if checkpoints is None:
        checkpoints = [max(abs(lo), abs(hi))]
    cps = []
    for R in sorted(checkpoints):
        cutoff = np.searchsorted(radius, R, side="right")
        hit = int(((first >= 0) & (first < cutoff)).sum())
        cps.append((R, hit / total))
    hit_total = int((first >= 0).sum())
    missing = []
    for b in np.nonzero(first < 0)[0][:missing_sample]:
        coords = []
        b = int(b)
        for _ in range(d):
            coords.append(b % per_axis)
            b //= per_axis
        coords.reverse()
        if sys.is_subshift:
            coords = [words[c] for c in coords]
        missing.append(coords)
    notes = ["coverage is measured on a finite window at a finite resolution"]
    if hit_total < total:
        notes.append(f"coverage below 1: {total - hit_total} of {total} boxes not visited")
    return DensityReport([format_expr(p) for p in polys], sys.describe(), resolution,
                         (lo, hi), total, hit_total, missing, cps, notes)


# --- N ∩ C syndeticity -----------------------------------------------------------------

@dataclass
class SyndeticReport:
    report: object
    hits: int
    not_found: List[int]
    constraint: dict

    def to_json(self):
        out = self.report.to_json(include_members=False)
        out["hits_in_N"] = self.hits
        out["not_found_within_horizon"] = self.not_found[:100]
        out["not_found_count"] = len(self.not_found)
        out["constraint"] = self.constraint
        out["notes"] = list(out["notes"]) + [
            "finite-window evidence only: no effective syndeticity bound is claimed"]
        return out


def syndetic_check_NcapC(sys, U, Vs, polys, C, window, L_probe=1, horizon=DEFAULT_HORIZON,
                         cap=DEFAULT_WINDOW_CAP, policy=DEFAULT_POLICY):
    C = C if C is not None else ConstraintSet()
    hr = multi_hitting(sys, U, Vs, polys, window, horizon, cap, policy)
    lo, hi = window
    members = C.enumerate(lo, hi, cap=cap, policy=policy)
    mset = set(members)
    both = [n for n in hr.hits if n in mset]
    rep = classify(both, window, L_probe)
    return SyndeticReport(rep, len(hr.hits), hr.not_found, C.to_json())
