"""Metric thickness of gap sets.

Neighbourhood measures, porosity scans, box counting and the power-law
fit of portion neighbourhoods against ``delta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ReliabilityError, ValidationError
from .fitting import ExponentFit, loglog_fit
from .sets import GapSequence, GapSet

# Neighbourhood-based reports trust delta >= RELIABLE_FACTOR * resolution.
RELIABLE_FACTOR = 3.0


def reliable_floor(S: GapSet) -> float:
    return RELIABLE_FACTOR * S.resolution


def _union_measure(lo, hi, delta):
    """Measure of ``U (lo_i - delta, hi_i + delta)`` for sorted disjoint intervals."""
    if lo.size == 0:
        return 0.0
    between = lo[1:] - hi[:-1]
    return (
        math.fsum(hi - lo)
        + 2.0 * delta
        + math.fsum(np.minimum(between, 2.0 * delta))
    )


def neighborhood_measure(S: GapSet, delta):
    """Lebesgue measure of the open ``delta``-neighbourhood of ``S``.

    ``delta`` may be a scalar or an array.
    """
    d = np.asarray(delta, dtype=float)
    if np.any(~(d > 0)):
        raise ValidationError("delta must be > 0", field="delta")
    comps = S.components()
    if d.ndim == 0:
        return _union_measure(comps[:, 0], comps[:, 1], float(d))
    # many deltas: sorted gap lengths and prefix sums
    g = np.sort(S.gap_lengths)
    csum = np.concatenate(([0.0], np.cumsum(g)))
    k = np.searchsorted(g, 2.0 * d, side="left")
    body = math.fsum(S.component_lengths)
    return body + 2.0 * d + csum[k] + 2.0 * d * (g.size - k)


def portion_neighborhood(S: GapSet, interval, delta) -> float:
    """Measure of the ``delta``-neighbourhood of ``S`` intersected with ``interval``.

    Warns (and returns 0) when the interval misses the window entirely.
    """
    delta = float(delta)
    if not delta > 0:
        raise ValidationError("delta must be > 0", field="delta")
    c, d = (float(v) for v in interval)
    if not (math.isfinite(c) and math.isfinite(d)) or d < c:
        raise ValidationError("interval must be bounded and ordered", field="interval")
    x0, x1 = S.window
    if d < x0 or c > x1:
        warnings.warn("interval does not meet the window; portion is empty", RuntimeWarning, stacklevel=2)
        return 0.0
    comps = S.components()
    keep = (comps[:, 1] >= c) & (comps[:, 0] <= d)
    lo = np.maximum(comps[keep, 0], c)
    hi = np.minimum(comps[keep, 1], d)
    return _union_measure(lo, hi, delta)


def gap_lower_bound(seq: GapSequence, delta: float) -> float:
    """``2 delta * card{k : delta_k > 2 delta}``."""
    delta = float(delta)
    if not delta > 0:
        raise ValidationError("delta must be > 0", field="delta")
    return 2.0 * delta * seq.count_above(2.0 * delta)


# ---------------------------------------------------------------------------
# Porosity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PorosityEstimate:
    """Smallest scanned ratio (largest free subinterval) / (interval length).

    ``c_hat`` bounds the porosity constant of the represented set from
    above; it is an estimate, not a verified constant.
    """

    c_hat: float
    witness: tuple
    free_part: tuple
    intervals_scanned: int
    levels: int

    def to_dict(self):
        return {
            "c_hat": self.c_hat,
            "witness": list(self.witness),
            "free_part": list(self.free_part),
            "intervals_scanned": self.intervals_scanned,
            "levels": self.levels,
        }


class _RangeMax:
    """Sparse table for O(1) range-maximum queries with argmax."""

    def __init__(self, values):
        v = np.asarray(values, dtype=float)
        self.arg = [np.arange(v.size)]
        self.v = v
        j = 1
        while (1 << j) <= v.size:
            prev = self.arg[-1]
            half = 1 << (j - 1)
            left, right = prev[: v.size - (1 << j) + 1], prev[half : half + v.size - (1 << j) + 1]
            self.arg.append(np.where(v[left] >= v[right], left, right))
            j += 1

    def query(self, lo, hi):
        """argmax over ``[lo, hi]`` inclusive (vectorised, requires lo <= hi)."""
        k = np.floor(np.log2(hi - lo + 1)).astype(int)
        out = np.empty(lo.shape, dtype=np.int64)
        for level in np.unique(k):
            m = k == level
            a = self.arg[level][lo[m]]
            b = self.arg[level][hi[m] - (1 << level) + 1]
            out[m] = np.where(self.v[a] >= self.v[b], a, b)
        return out


def _largest_free(S: GapSet, c, d, table):
    """Largest open subinterval of ``[c, d]`` missing ``S`` (vectorised).

    Returns ``(length, left, right)`` arrays.
    """
    a, b = S.gaps[:, 0], S.gaps[:, 1]
    x0, x1 = S.window
    best = np.zeros(c.shape)
    bl, br = c.copy(), c.copy()

    def offer(length, left, right):
        better = length > best
        best[better] = length[better]
        bl[better] = left[better]
        br[better] = right[better]

    # parts outside the window
    offer(np.clip(x0 - c, 0, None), c, np.minimum(x0, d))
    offer(np.clip(d - x1, 0, None), np.maximum(x1, c), d)
    if a.size:
        lo = np.searchsorted(b, c, side="right")
        hi = np.searchsorted(a, d, side="left") - 1
        for j in (lo, hi):
            ok = (j >= 0) & (j < a.size) & (lo <= hi)
            jj = np.where(ok, j, 0)
            left = np.maximum(a[jj], c)
            right = np.minimum(b[jj], d)
            offer(np.where(ok, np.clip(right - left, 0, None), 0.0), left, right)
        inner = (hi - lo) >= 2
        if np.any(inner):
            idx = np.flatnonzero(inner)
            arg = table.query(lo[idx] + 1, hi[idx] - 1)
            length = np.zeros(c.shape)
            left, right = c.copy(), c.copy()
            length[idx] = b[arg] - a[arg]
            left[idx], right[idx] = a[arg], b[arg]
            offer(length, left, right)
    return best, bl, br


def porosity_estimate(S: GapSet, resolution: int = 8) -> PorosityEstimate:
    """Scan dyadic sub-windows at ``resolution`` scales and the intervals
    between consecutive component midpoints; return the worst ratio.
    """
    resolution = int(resolution)
    if resolution < 1:
        raise ValidationError("resolution must be >= 1", field="resolution")
    x0, x1 = S.window
    if S.n_gaps == 0 or S.length == 0:
        return PorosityEstimate(0.0, (x0, x1), (x0, x0), 1, 0)
    cs, ds = [], []
    for level in range(resolution):
        k = np.arange(1 << level)
        w = S.length / (1 << level)
        cs.append(x0 + k * w)
        ds.append(x0 + (k + 1) * w)
    mids = S.components().mean(axis=1)
    cs.append(mids[:-1])
    ds.append(mids[1:])
    c = np.concatenate(cs)
    d = np.concatenate(ds)
    keep = d > c
    c, d = c[keep], d[keep]
    table = _RangeMax(S.gap_lengths)
    free, fl, fr = _largest_free(S, c, d, table)
    ratio = free / (d - c)
    i = int(np.argmin(ratio))
    return PorosityEstimate(
        c_hat=float(ratio[i]),
        witness=(float(c[i]), float(d[i])),
        free_part=(float(fl[i]), float(fr[i])),
        intervals_scanned=int(c.size),
        levels=resolution,
    )


# ---------------------------------------------------------------------------
# Box counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionFit:
    """Covering counts ``N(delta)`` and the fitted box dimension."""

    scales: tuple
    counts: tuple
    reliable: tuple
    slope: float
    r2: float
    points_used: int

    def to_dict(self):
        return {
            "scales": list(self.scales),
            "counts": list(self.counts),
            "reliable": list(self.reliable),
            "slope": self.slope,
            "r2": self.r2,
            "points_used": self.points_used,
            "label": "box-counting dimension (upper proxy)",
        }


def _snap(t):
    r = np.round(t)
    return np.where(np.abs(t - r) <= 1e-9 * np.maximum(1.0, np.abs(t)), r, t)


def cover_count(S: GapSet, delta: float) -> int:
    """Grid cells ``[x0 + i delta, x0 + (i+1) delta)`` meeting ``S``."""
    x0 = S.window[0]
    n_cells = max(1, math.ceil(float(_snap(np.array(S.length / delta)))))
    comps = S.components()
    tl = _snap((comps[:, 0] - x0) / delta)
    th = _snap((comps[:, 1] - x0) / delta)
    degenerate = comps[:, 1] == comps[:, 0]
    start = np.floor(tl)
    end = np.where(degenerate, np.floor(th), np.ceil(th) - 1)
    end = np.maximum(end, start)
    start = np.clip(start, 0, n_cells - 1).astype(np.int64)
    end = np.clip(end, 0, n_cells - 1).astype(np.int64)
    prev_end = np.concatenate(([-1], np.maximum.accumulate(end)[:-1]))
    new = end - np.maximum(start, prev_end + 1) + 1
    return int(np.sum(np.clip(new, 0, None)))


def box_counting(S: GapSet, scales) -> DimensionFit:
    """Box-counting dimension: slope of ``log N(delta)`` against ``log(1/delta)``.

    Scales below the truncation resolution are flagged unreliable and
    left out of the fit.
    """
    sc = np.asarray(scales, dtype=float)
    if sc.ndim != 1 or sc.size < 2:
        raise ValidationError("need at least two scales", field="scales")
    if np.any(sc <= 0) or np.any(np.diff(sc) >= 0):
        raise ValidationError("scales must be positive and strictly decreasing", field="scales")
    if S.length > 0 and sc[0] >= S.length:
        raise ValidationError("scales must be smaller than the window", field="scales")
    counts = np.array([cover_count(S, d) for d in sc])
    reliable = sc >= S.resolution
    if np.count_nonzero(reliable) < 2:
        raise ReliabilityError("fewer than two scales above the truncation resolution")
    x = np.log(1.0 / sc[reliable])
    y = np.log(counts[reliable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DimensionFit(
        scales=tuple(sc.tolist()),
        counts=tuple(int(c) for c in counts),
        reliable=tuple(bool(r) for r in reliable),
        slope=float(slope) + 0.0,
        r2=float(r2),
        points_used=int(np.count_nonzero(reliable)),
    )


# ---------------------------------------------------------------------------
# Portion-neighbourhood exponent
# ---------------------------------------------------------------------------


def conjugate(p: float) -> float:
    return p / (p - 1.0)


def theorem2_fit(S: GapSet, interval, delta_grid, p=None, tol=0.05) -> ExponentFit:
    """Fit ``|(S cap I)_delta| ~ c delta**e`` over the reliable part of the grid.

    With ``p`` given (``1 < p < 2``) the fit is compared against the
    exponent ``1 - 2/q`` that LP(p) sets must reach: ``passed`` is
    ``e >= 1 - 2/q - tol``.
    """
    grid = np.asarray(delta_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValidationError("delta_grid must be positive", field="delta_grid")
    floor = reliable_floor(S)
    reliable = grid >= floor
    measures = np.array([portion_neighborhood(S, interval, d) for d in grid])
    used = reliable & (measures > 0)
    if np.count_nonzero(used) < 4:
        raise ReliabilityError(
            f"only {int(np.count_nonzero(used))} grid points above the reliable floor {floor:.3g}"
        )
    extras = {
        "interval": [float(v) for v in interval],
        "reliable_floor": floor,
        "deltas": grid.tolist(),
        "measures": measures.tolist(),
        "reliable": reliable.tolist(),
    }
    fit = loglog_fit(grid[used], measures[used], extras=extras)
    if p is not None:
        p = float(p)
        if not 1 < p < 2:
            raise ValidationError("p must lie in (1, 2)", field="p")
        q = conjugate(p)
        bound = 1.0 - 2.0 / q
        fit.extras.update(
            {"p": p, "q": q, "bound_exponent": bound, "tolerance": tol, "passed": fit.exponent >= bound - tol}
        )
    return fit


def thickness_rows(S: GapSet, deltas, bound=None):
    """Rows ``(delta, measure, bound, reliable)`` for CSV export.

    ``bound`` is a callable of ``delta`` or ``None``.
    """
    floor = reliable_floor(S)
    rows = []
    for d in np.asarray(deltas, dtype=float):
        m = neighborhood_measure(S, float(d))
        b = float(bound(float(d))) if bound is not None else float("nan")
        rows.append((float(d), float(m), b, bool(d >= floor)))
    return rows
