"""Splitting subsets, admissible shifts and chain search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .exceptions import InfeasibleShiftError, ValidationError
from .sets import IN_SET, Chain, GapSet, lemma5_sequence  # noqa: F401  (re-exported)

CHAIN_TOL = 1e-12
EXACT_MAX_ORDER = 3
EXACT_MAX_POINTS = 64


@dataclass(frozen=True)
class SplittingCertificate:
    """Band assignment of each point; ``valid`` iff all bands are distinct gaps.

    ``gap_index`` uses the band numbering of :class:`GapSet` (``-1`` for a
    point of the set).  On failure ``reason`` names the first offence.
    """

    points: tuple
    gap_index: tuple
    valid: bool
    reason: str = ""

    def to_dict(self):
        return {
            "valid": self.valid,
            "assignments": [[p, g] for p, g in zip(self.points, self.gap_index)],
        }


@dataclass(frozen=True)
class APSpec:
    """Arithmetic progression ``a + k d``, ``k = 1 .. N``."""

    a: float
    d: float
    N: int

    def __post_init__(self):
        if self.d == 0:
            raise ValidationError("progression step d must be nonzero", field="d")
        if int(self.N) < 1:
            raise ValidationError("N must be >= 1", field="N")
        object.__setattr__(self, "N", int(self.N))

    def points(self) -> np.ndarray:
        return self.a + np.arange(1, self.N + 1) * self.d


def splits(F, S: GapSet) -> SplittingCertificate:
    """Does ``F`` lie off ``S`` with at most one point per complementary interval?"""
    pts = np.asarray(F, dtype=float).ravel()
    bands = S.locate(pts) if pts.size else np.empty(0, dtype=np.int64)
    reason = ""
    in_set = np.flatnonzero(bands == IN_SET)
    if in_set.size:
        reason = f"point {float(pts[in_set[0]])!r} lies in the set"
    else:
        seen = {}
        for i, g in enumerate(bands.tolist()):
            if g in seen:
                reason = f"points {float(pts[seen[g]])!r} and {float(pts[i])!r} share interval {g}"
                break
            seen[g] = i
    return SplittingCertificate(
        points=tuple(pts.tolist()),
        gap_index=tuple(int(g) for g in bands),
        valid=not reason,
        reason=reason,
    )


def max_splitting_subset(S: GapSet, ap: APSpec):
    """Largest subset of the progression that splits ``S``.

    One point per complementary interval hit (the leftmost on ties), so
    the count is the number of distinct intervals the progression meets.
    Returns ``(nu, subset, indices)``; ``indices`` are the ``k`` values.
    """
    pts = ap.points()
    x0, x1 = S.window
    if pts.min() < x0 or pts.max() > x1:
        raise ValidationError("progression must lie inside the window", field="ap")
    bands = S.locate(pts)
    order = np.argsort(pts, kind="stable")
    chosen = {}
    for i in order:
        g = int(bands[i])
        if g != IN_SET and g not in chosen:
            chosen[g] = i
    idx = np.array(sorted(chosen.values(), key=lambda i: pts[i]), dtype=np.int64)
    subset = pts[idx] if idx.size else np.empty(0)
    return len(idx), subset, (idx + 1).tolist()


def _merge_closed(lo, hi):
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    out_lo, out_hi = [], []
    for a, b in zip(lo.tolist(), hi.tolist()):
        if out_lo and a <= out_hi[-1]:
            out_hi[-1] = max(out_hi[-1], b)
        else:
            out_lo.append(a)
            out_hi.append(b)
    return out_lo, out_hi


def feasible_shifts(F, S: GapSet, delta: float):
    """Open intervals of ``xi in (-delta, delta)`` with ``(F + xi)`` missing ``S``."""
    comps = S.components()
    lo_all, hi_all = comps[:, 0], comps[:, 1]
    blocks_lo, blocks_hi = [], []
    for t in np.asarray(F, dtype=float).ravel():
        # components within reach of t
        i0 = np.searchsorted(hi_all, t - delta, side="left")
        i1 = np.searchsorted(lo_all, t + delta, side="right")
        blocks_lo.append(lo_all[i0:i1] - t)
        blocks_hi.append(hi_all[i0:i1] - t)
    lo = np.concatenate(blocks_lo) if blocks_lo else np.empty(0)
    hi = np.concatenate(blocks_hi) if blocks_hi else np.empty(0)
    keep = (hi > -delta) & (lo < delta)
    m_lo, m_hi = _merge_closed(lo[keep], hi[keep])
    free, cursor = [], -delta
    for a, b in zip(m_lo, m_hi):
        if a > cursor:
            free.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < delta:
        free.append((cursor, delta))
    covered = 2 * delta - math.fsum(b - a for a, b in free)
    return free, covered / (2 * delta)


def lemma2_shift(F, S: GapSet, delta: float) -> float:
    """Small shift ``xi``, ``|xi| < delta``, moving every point of ``F`` off ``S``.

    Returns 0 when ``F`` already misses ``S``; otherwise the midpoint of
    the feasible piece closest to 0 (ties go to the negative side).
    """
    delta = float(delta)
    if not delta > 0:
        raise ValidationError("delta must be > 0", field="delta")
    F = np.asarray(F, dtype=float).ravel()
    if F.size == 0 or not np.any(S.contains(F)):
        return 0.0
    free, coverage = feasible_shifts(F, S, delta)
    if not free:
        raise InfeasibleShiftError(
            f"every shift in (-{delta}, {delta}) meets the set",
            coverage=coverage,
            witness={"delta": delta},
        )
    mids = sorted((0.5 * (a + b) for a, b in free), key=lambda m: (abs(m), m))
    # pieces narrower than the float spacing of F can round back onto the set
    for m in mids:
        if not np.any(S.contains(F + m)):
            return m
    raise InfeasibleShiftError(
        "feasible shifts exist but are below floating-point resolution",
        coverage=coverage,
        witness={"delta": delta, "free": free},
    )


def chain_split_shift(ch: Chain, S: GapSet, delta0: float, floor: float = 1e-15, max_halvings: int = 200):
    """Shift a chain so that it splits ``S``; halve ``delta`` until it does.

    Returns ``(xi, certificate)``.
    """
    pts = ch.points()
    delta = float(delta0)
    if not delta > 0:
        raise ValidationError("delta0 must be > 0", field="delta0")
    last = None
    for _ in range(max_halvings):
        if delta < floor * max(1.0, abs(S.window[0]), abs(S.window[1])):
            break
        try:
            xi = lemma2_shift(pts, S, delta)
        except InfeasibleShiftError as err:
            raise InfeasibleShiftError(
                f"no shift of the chain avoids the set: {err}", coverage=err.coverage, witness=err.witness
            ) from None
        cert = splits(pts + xi, S)
        if cert.valid:
            return xi, cert
        last = cert
        delta /= 2
    blocking = None
    if last is not None:
        bands = [g for g in last.gap_index if g != IN_SET]
        dup = [g for g in bands if bands.count(g) > 1]
        blocking = dup[0] if dup else None
    raise InfeasibleShiftError(
        "no splitting shift found down to the resolution floor"
        + (f"; points share interval {blocking}" if blocking is not None else ""),
        witness={"blocking_interval": blocking, "certificate": last.to_dict() if last else None},
    )


# ---------------------------------------------------------------------------
# Chain search
# ---------------------------------------------------------------------------


class _PointIndex:
    def __init__(self, points, tol):
        self.p = np.unique(np.asarray(points, dtype=float))
        self.tol = tol

    def has(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        i = np.searchsorted(self.p, x)
        lo = np.clip(i - 1, 0, self.p.size - 1)
        hi = np.clip(i, 0, self.p.size - 1)
        return (np.abs(self.p[lo] - x) <= self.tol) | (np.abs(self.p[hi] - x) <= self.tol)


def _extend(idx, base, built, lengths, candidates, n, tol):
    """Depth-first search adding lengths in increasing order."""
    if len(lengths) == n:
        return Chain(base, tuple(lengths))
    start = 0 if not lengths else np.searchsorted(candidates, lengths[-1] + tol, side="right")
    for l in candidates[start:]:
        shifted = built + l
        if not np.all(idx.has(shifted)):
            continue
        # new sums must not coincide with old ones
        if np.any(np.abs(shifted[:, None] - built[None, :]) <= tol):
            continue
        found = _extend(idx, base, np.concatenate((built, shifted)), lengths + [float(l)], candidates, n, tol)
        if found is not None:
            return found
    return None


def find_chain(points, n: int, heuristic: bool = False, tol: float = CHAIN_TOL):
    """An ``n``-chain inside ``points``, or ``None``.

    Exact (exhaustive) for ``n <= 3`` and at most 64 points; otherwise
    ``heuristic=True`` is required and the search only tries lengths drawn
    from the most frequent differences, so ``None`` is not a proof of
    absence.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("n must be >= 1", field="n")
    idx = _PointIndex(points, tol)
    p = idx.p
    exact = n <= EXACT_MAX_ORDER and p.size <= EXACT_MAX_POINTS
    if not exact and not heuristic:
        raise ValidationError(
            f"exact chain search is limited to n <= {EXACT_MAX_ORDER} and "
            f"{EXACT_MAX_POINTS} points; pass heuristic=True",
            field="n",
        )
    if p.size < (1 << n):
        return None
    if exact:
        for i, base in enumerate(p):
            cand = p[i + 1 :] - base
            found = _extend(idx, base, np.array([base]), [], cand, n, tol)
            if found is not None:
                return found
        return None
    return _greedy_chain(idx, n, tol)


def _greedy_chain(idx, n, tol, top=32):
    p = idx.p
    diffs = (p[None, :] - p[:, None])[np.triu_indices(p.size, 1)]
    vals, counts = np.unique(np.round(diffs / tol) * tol if tol > 0 else diffs, return_counts=True)
    # a chain of order n needs each length at least 2**(n-1) times
    popular = vals[np.argsort(-counts, kind="stable")][:top]
    popular = np.sort(popular[popular > 0])
    for base in p:
        found = _extend(idx, base, np.array([base]), [], popular, n, tol)
        if found is not None:
            return found
    return None


def is_chain(points, tol: float = CHAIN_TOL) -> bool:
    """Brute-force check that ``points`` (exactly ``2**n`` of them) form an ``n``-chain."""
    p = np.sort(np.asarray(points, dtype=float))
    m = p.size
    n = m.bit_length() - 1
    if m == 0 or (1 << n) != m:
        return False
    idx = _PointIndex(p, tol)
    base = p[0]
    for choice in combinations(p[1:], n):
        ch = Chain(base, tuple(c - base for c in choice))
        q = ch.points()
        if np.all(np.diff(q) > tol) and np.all(idx.has(q)):
            return True
    return False
