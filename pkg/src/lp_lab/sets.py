"""Finite representations of closed null sets on the line.

A closed set ``E`` is stored through its window ``[x0, x1]`` and the sorted
open gaps removed from it.  Whatever the construction truncates away is
summarised by ``resolution``: the ideal set is contained in the
represented components, and no feature of the ideal set finer than
``resolution`` is visible.

Complementary intervals of ``E`` in the whole line are numbered left to
right as *bands*: band 0 is the ray ``(-inf, x0)``, band ``j + 1`` is gap
``j`` and band ``n + 1`` is ``(x1, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ValidationError

MAX_DEPTH = 20
MAX_TERMS = 20
MAX_CHAIN_ORDER = 8

# Marker returned by GapSet.locate for points of the closed set itself.
IN_SET = -1


def _readonly(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GapSet:
    """Closed set ``window \\ union(gaps)``.

    Build through :func:`from_gaps` or one of the family constructors;
    the dataclass constructor validates as well.
    """

    window: tuple[float, float]
    gaps: np.ndarray
    depth: int = 0
    resolution: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x0, x1 = (float(v) for v in self.window)
        if not (math.isfinite(x0) and math.isfinite(x1)):
            raise ValidationError("window must be finite", field="window")
        if x1 < x0:
            raise ValidationError(f"window [{x0}, {x1}] is reversed", field="window")
        gaps = np.asarray(self.gaps, dtype=float).reshape(-1, 2)
        if gaps.size and not np.all(np.isfinite(gaps)):
            raise ValidationError("gap endpoints must be finite", field="gaps")
        if gaps.size:
            gaps = gaps[np.argsort(gaps[:, 0], kind="stable")]
            a, b = gaps[:, 0], gaps[:, 1]
            bad = np.flatnonzero(b <= a)
            if bad.size:
                j = bad[0]
                raise ValidationError(f"zero-length or reversed gap ({a[j]}, {b[j]})", field="gaps")
            out = np.flatnonzero((a < x0) | (b > x1))
            if out.size:
                j = out[0]
                raise ValidationError(
                    f"gap ({a[j]}, {b[j]}) lies outside window [{x0}, {x1}]", field="gaps"
                )
            clash = np.flatnonzero(a[1:] < b[:-1])
            if clash.size:
                j = clash[0]
                raise ValidationError(
                    f"overlapping gaps ({a[j]}, {b[j]}) and ({a[j + 1]}, {b[j + 1]})",
                    field="gaps",
                )
        if self.resolution < 0 or not math.isfinite(self.resolution):
            raise ValidationError("resolution must be finite and >= 0", field="resolution")
        object.__setattr__(self, "window", (x0, x1))
        object.__setattr__(self, "gaps", _readonly(gaps))
        object.__setattr__(self, "depth", int(self.depth))
        object.__setattr__(self, "resolution", float(self.resolution))
        object.__setattr__(self, "meta", dict(self.meta))

    # -- basic geometry -------------------------------------------------

    @property
    def length(self) -> float:
        return self.window[1] - self.window[0]

    @property
    def n_gaps(self) -> int:
        return len(self.gaps)

    @property
    def gap_lengths(self) -> np.ndarray:
        return self.gaps[:, 1] - self.gaps[:, 0]

    @property
    def residual(self) -> float:
        """Total length of the components (window length minus gaps)."""
        return self.length - math.fsum(self.gap_lengths)

    def components(self) -> np.ndarray:
        """Maximal closed intervals of the set, shape ``(n_gaps + 1, 2)``.

        Degenerate (single point) components appear as ``[x, x]``.
        """
        x0, x1 = self.window
        lo = np.concatenate(([x0], self.gaps[:, 1]))
        hi = np.concatenate((self.gaps[:, 0], [x1]))
        return np.column_stack((lo, hi))

    @property
    def component_lengths(self) -> np.ndarray:
        c = self.components()
        return c[:, 1] - c[:, 0]

    @property
    def n_components(self) -> int:
        return self.n_gaps + 1

    def points(self) -> np.ndarray:
        """Left endpoints of the components (the points, for a finite set)."""
        return self.components()[:, 0]

    @property
    def is_finite(self) -> bool:
        return bool(np.all(self.component_lengths == 0.0))

    # -- membership -----------------------------------------------------

    def locate(self, x) -> np.ndarray:
        """Band index of each ``x`` (see module docstring) or ``IN_SET``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        x0, x1 = self.window
        n = self.n_gaps
        out = np.full(x.shape, IN_SET, dtype=np.int64)
        out[x < x0] = 0
        out[x > x1] = n + 1
        if n:
            a, b = self.gaps[:, 0], self.gaps[:, 1]
            j = np.searchsorted(a, x, side="left") - 1
            inside = (j >= 0) & (x >= x0) & (x <= x1)
            jj = np.where(inside, j, 0)
            hit = inside & (x < b[jj])
            out[hit] = jj[hit] + 1
        return out

    def contains(self, x) -> np.ndarray:
        return self.locate(x) == IN_SET

    def band_interval(self, band: int) -> tuple[float, float]:
        """Open complementary interval for a band index."""
        n = self.n_gaps
        if band == 0:
            return (-math.inf, self.window[0])
        if band == n + 1:
            return (self.window[1], math.inf)
        if 1 <= band <= n:
            a, b = self.gaps[band - 1]
            return (float(a), float(b))
        raise IndexError(band)

    # -- serialisation --------------------------------------------------

    def to_dict(self) -> dict:
        meta = dict(self.meta)
        meta.setdefault("resolution", self.resolution)
        return {
            "window": [self.window[0], self.window[1]],
            "gaps": self.gaps.tolist(),
            "depth": self.depth,
            "meta": meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GapSet":
        meta = dict(data.get("meta", {}))
        return from_gaps(
            data["window"],
            data["gaps"],
            depth=data.get("depth", 0),
            resolution=meta.get("resolution", 0.0),
            meta=meta,
        )

    def same_as(self, other: "GapSet") -> bool:
        """Exact (bitwise) equality of window, gaps and depth."""
        return (
            self.window == other.window
            and self.depth == other.depth
            and self.gaps.shape == other.gaps.shape
            and bool(np.array_equal(self.gaps, other.gaps))
        )

    def __repr__(self):
        return (
            f"GapSet(window={self.window}, n_gaps={self.n_gaps}, depth={self.depth}, "
            f"residual={self.residual:.6g}, resolution={self.resolution:.3g})"
        )


def from_gaps(window, gaps, depth=0, resolution=0.0, meta=None) -> GapSet:
    """Validated :class:`GapSet` from a window and a list of open gaps."""
    x0, x1 = (float(v) for v in window)
    if not x1 > x0:
        raise ValidationError(f"window [{x0}, {x1}] is degenerate", field="window")
    return GapSet((x0, x1), np.asarray(gaps, dtype=float).reshape(-1, 2), depth, resolution, meta or {})


def from_points(points, depth=0, resolution=0.0, meta=None) -> GapSet:
    """Finite set: every point becomes a degenerate component.

    The window spans the extreme points.  Points equal in floating point
    are merged; ``meta['n_points']`` records how many distinct points
    survived.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValidationError("at least one point is required", field="points")
    gaps = np.column_stack((pts[:-1], pts[1:]))
    meta = dict(meta or {})
    meta.setdefault("n_points", int(pts.size))
    return GapSet((pts[0], pts[-1]), gaps, depth, resolution, meta)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def dyadic_set(k_min: int, k_max: int) -> GapSet:
    """``{0} U {+-2**k : k_min <= k <= k_max}`` on ``[-2**k_max, 2**k_max]``."""
    k_min, k_max = int(k_min), int(k_max)
    if k_min > k_max:
        raise ValidationError(f"k_min={k_min} exceeds k_max={k_max}", field="k_min")
    pos = np.ldexp(1.0, np.arange(k_min, k_max + 1))
    pts = np.concatenate((-pos[::-1], [0.0], pos))
    return from_points(
        pts,
        depth=k_max - k_min,
        # the omitted points +-2**k, k < k_min, all sit inside (-2**k_min, 2**k_min)
        resolution=math.ldexp(1.0, k_min),
        meta={"family": "dyadic", "k_min": k_min, "k_max": k_max},
    )


def cantor_triadic(depth: int, max_depth: int = MAX_DEPTH) -> GapSet:
    """Middle-thirds Cantor set truncated after ``depth`` removal steps."""
    depth = int(depth)
    if depth < 0:
        raise ValidationError("depth must be >= 0", field="depth")
    if depth > max_depth:
        raise ValidationError(f"depth {depth} exceeds max_depth {max_depth}", field="depth")
    scale = 3**depth
    # integer arithmetic in units of 3**-depth keeps every endpoint exact
    lefts = np.zeros(1, dtype=np.int64)
    gap_lo, gap_hi = [], []
    for j in range(1, depth + 1):
        step = 3 ** (depth - j)
        gap_lo.append(lefts + step)
        gap_hi.append(lefts + 2 * step)
        lefts = np.concatenate((lefts, lefts + 2 * step))
    if depth:
        lo = np.concatenate(gap_lo)
        hi = np.concatenate(gap_hi)
        order = np.argsort(lo)
        gaps = np.column_stack((lo[order] / scale, hi[order] / scale))
    else:
        gaps = np.empty((0, 2))
    return GapSet(
        (0.0, 1.0),
        gaps,
        depth=depth,
        resolution=3.0**-depth,
        meta={"family": "cantor", "depth": depth},
    )


def _check_decay(lengths, name="lengths"):
    ls = np.asarray(lengths, dtype=float)
    if ls.ndim != 1 or ls.size == 0:
        raise ValidationError(f"{name} must be a non-empty list", field=name)
    if np.any(~np.isfinite(ls)) or np.any(ls <= 0):
        raise ValidationError(f"{name} must be positive", field=name)
    bad = np.flatnonzero(ls[1:] >= ls[:-1] / 2)
    if bad.size:
        k = bad[0]
        raise ValidationError(
            f"decay l[k+1] < l[k]/2 violated at k={k + 1}: {ls[k + 1]} >= {ls[k]}/2", field=name
        )
    return ls


def subset_sums(lengths) -> np.ndarray:
    """All ``2**K`` sums ``sum eps_k l_k``, sorted."""
    sums = np.zeros(1)
    for l in lengths:
        sums = np.concatenate((sums, sums + l))
    return np.sort(sums)


def sum_set(lengths: Sequence[float], max_terms: int = MAX_TERMS) -> GapSet:
    """The ``2**K`` subset sums of fast-decaying lengths, as a finite set."""
    ls = _check_decay(lengths)
    if ls.size > max_terms:
        raise ValidationError(f"{ls.size} lengths exceed max_terms {max_terms}", field="lengths")
    pts = subset_sums(ls)
    if np.unique(pts).size != pts.size:
        raise ValidationError("subset sums collide in floating point", field="lengths")
    return from_points(
        pts,
        depth=ls.size,
        # omitted terms l_{K+1}, ... sum to less than l_K
        resolution=float(ls[-1]),
        meta={"family": "sum_set", "lengths": ls.tolist()},
    )


# ---------------------------------------------------------------------------
# Gap sequences and generated sets
# ---------------------------------------------------------------------------


class GapSequence:
    """Positive gap lengths ``delta_1, delta_2, ...`` (1-indexed).

    Use the classmethods; ``family`` is one of ``explicit``, ``geometric``,
    ``stretched`` or ``custom``.
    """

    def __init__(self, family, term, params=None, total=None, size=None):
        self.family = family
        self._term = term
        self.params = dict(params or {})
        self._total = total
        self.size = size  # None for infinite sequences

    @classmethod
    def explicit(cls, deltas):
        d = np.asarray(deltas, dtype=float)
        if d.ndim != 1 or d.size == 0 or np.any(d <= 0) or np.any(~np.isfinite(d)):
            raise ValidationError("deltas must be a non-empty list of positive numbers", field="deltas")
        d.setflags(write=False)

        def term(k):
            k = np.asarray(k)
            out = np.zeros(k.shape)
            ok = (k >= 1) & (k <= d.size)
            out[ok] = d[k[ok] - 1]
            return out

        return cls("explicit", term, {"deltas": d.tolist()}, math.fsum(d), d.size)

    @classmethod
    def geometric(cls, b, a=None):
        """``delta_k = a exp(-k b)``; ``a=None`` normalises the sum to 1."""
        b = float(b)
        if not b > 0:
            raise ValidationError("b must be > 0", field="b")
        if a is None:
            a = math.expm1(b)
        a = float(a)
        if not a > 0:
            raise ValidationError("a must be > 0", field="a")
        total = a / math.expm1(b)
        return cls(
            "geometric",
            lambda k: a * np.exp(-np.asarray(k, dtype=float) * b),
            {"a": a, "b": b},
            total,
        )

    @classmethod
    def stretched(cls, b_func: Callable[[float], float], a=None, label="custom"):
        """``delta_k = a exp(-k b(k))`` with ``b`` non-decreasing and positive."""
        bv = np.vectorize(b_func, otypes=[float])

        def raw(k):
            k = np.asarray(k, dtype=float)
            return np.exp(-k * bv(k))

        raw_total = _sum_decreasing(raw)
        if a is None:
            a = 1.0 / raw_total
        a = float(a)
        return cls(
            "stretched",
            lambda k: a * raw(k),
            {"a": a, "b": label},
            a * raw_total,
        )

    @classmethod
    def from_gamma(cls, gamma: Callable[[float], float], label="gamma"):
        """Sequence with ``b(x) = 1 / gamma(exp(-x))``, ``gamma`` rescaled so ``gamma(1/e) = 1/4``."""
        g1 = float(gamma(math.exp(-1.0)))
        if not g1 > 0:
            raise ValidationError("gamma(1/e) must be positive", field="gamma")
        scale = 0.25 / g1
        return cls.stretched(lambda x: 1.0 / (scale * gamma(math.exp(-x))), label=label)

    @classmethod
    def custom(cls, term: Callable, total=None, label="custom"):
        t = np.vectorize(term, otypes=[float])
        if total is None:
            total = _sum_decreasing(t)
        return cls("custom", lambda k: t(np.asarray(k, dtype=float)), {"term": label}, float(total))

    def terms(self, n: int) -> np.ndarray:
        """``delta_1 .. delta_n`` (zeros past the end of a finite sequence)."""
        return np.asarray(self._term(np.arange(1, int(n) + 1)), dtype=float)

    def __getitem__(self, k):
        return float(self._term(np.asarray([k]))[0])

    def total(self) -> float:
        return float(self._total)

    def tail(self, n: int) -> float:
        """``sum_{k > n} delta_k``."""
        if self.size is not None and n >= self.size:
            return 0.0
        if self.family == "geometric":
            a, b = self.params["a"], self.params["b"]
            return a * math.exp(-n * b) / math.expm1(b)
        return max(self.total() - math.fsum(self.terms(n)), 0.0)

    def count_above(self, threshold: float) -> int:
        """``card{k : delta_k > threshold}`` for a decreasing sequence."""
        if self.size is not None:
            return int(np.count_nonzero(self.terms(self.size) > threshold))
        if self.family == "geometric":
            a, b = self.params["a"], self.params["b"]
            if threshold >= a * math.exp(-b):
                return 0
            x = math.log(a / threshold) / b
            n = math.ceil(x) - 1
            # guard the floor/ceil against rounding at the boundary
            while self[n + 1] > threshold:
                n += 1
            while n > 0 and not self[n] > threshold:
                n -= 1
            return n
        n, block = 0, 256
        while True:
            t = self._term(np.arange(n + 1, n + block + 1))
            above = np.count_nonzero(t > threshold)
            n += int(above)
            if above < block:
                return n
            block *= 2

    def ratios(self, n: int) -> np.ndarray:
        d = self.terms(n + 1)
        return d[1:] / d[:-1]

    def is_decreasing(self, n: int) -> bool:
        d = self.terms(n)
        # subnormal terms lose the precision needed to compare them
        d = d[d > np.finfo(float).tiny]
        return bool(np.all(d[1:] < d[:-1]))

    def ratio_condition(self, tau: float, n: int) -> bool:
        """``delta_{k+1} / delta_k <= tau`` for ``k < n``."""
        if self.size is not None:
            n = min(n, self.size - 1)
        if n < 1:
            return True
        return bool(np.all(self.ratios(n) <= tau))

    def to_dict(self):
        return {"family": self.family, "params": self.params, "total": self.total()}

    def __repr__(self):
        return f"GapSequence({self.family}, {self.params})"


def _sum_decreasing(term, rel=1e-18, k_max=10**7):
    parts, k, block = [], 1, 16
    while k < k_max:
        t = np.asarray(term(np.arange(k, k + block)), dtype=float)
        parts.append(math.fsum(t))
        k += block
        if t[-1] <= rel * parts[0] or t[-1] == 0.0:
            return math.fsum(parts)
        block *= 2
    raise ValidationError("sequence does not appear summable", field="deltas")


def generated_set(
    seq: GapSequence, depth: int, max_depth: int = MAX_DEPTH, sum_tol: float = 1e-9
) -> GapSet:
    """Perfect subset of ``[0, 1]`` whose gaps are the given lengths.

    Gap ``k`` sits at node ``k`` of a binary tree in breadth-first order;
    the component under node ``k`` has length ``L_k = delta_k + L_2k +
    L_2k+1`` (full subtree sum).  Truncating at ``depth`` places gaps
    ``1 .. 2**depth - 1``.
    """
    depth = int(depth)
    if depth < 0:
        raise ValidationError("depth must be >= 0", field="depth")
    if depth > max_depth:
        raise ValidationError(f"depth {depth} exceeds max_depth {max_depth}", field="depth")
    total = seq.total()
    if abs(total - 1.0) > sum_tol:
        raise ValidationError(f"gap lengths sum to {total!r}, expected 1", field="deltas")

    # number of tree levels used for subtree sums
    levels = max(depth + 1, 1)
    cap = 22
    if seq.size is not None:
        while (1 << levels) - 1 < seq.size and levels < cap:
            levels += 1
    else:
        while seq.tail((1 << levels) - 1) > 1e-16 and levels < cap:
            levels += 1
    n_nodes = (1 << levels) - 1
    defect = seq.tail(n_nodes)
    if defect > sum_tol:
        raise ValidationError(
            f"sequence tail {defect:.3g} beyond {n_nodes} terms is too heavy to lay out",
            field="deltas",
        )
    delta = np.zeros(n_nodes + 1)
    delta[1:] = seq.terms(n_nodes)
    if not seq.is_decreasing(min(n_nodes, seq.size or n_nodes)):
        raise ValidationError("gap lengths must be strictly decreasing", field="deltas")

    sub = delta.copy()
    for lev in range(levels - 2, -1, -1):
        idx = np.arange(1 << lev, 1 << (lev + 1))
        sub[idx] += sub[2 * idx] + sub[2 * idx + 1]

    # in-order walk: leaf component, gap, leaf component, ...; a single
    # running sum keeps the endpoints monotone under rounding
    lens, rank = [], []
    for lev in range(depth + 1):
        idx = np.arange(1 << lev, 1 << (lev + 1))
        rank.append((2 * (idx - (1 << lev)) + 1) * (1 << (depth - lev)) - 1)
        lens.append(delta[idx] if lev < depth else sub[idx])
    rank = np.concatenate(rank)
    lens = np.concatenate(lens)[np.argsort(rank)]
    pos = np.concatenate(([0.0], np.cumsum(lens)))
    # odd positions in the walk are gaps
    gaps = np.column_stack((pos[1:-1:2], np.minimum(pos[2:-1:2], 1.0)))
    # gaps narrower than one ulp at their position collapse in floating point
    visible = gaps[:, 1] > gaps[:, 0]
    dropped = int(np.count_nonzero(~visible))
    gaps = gaps[visible]
    leaves = np.arange(1 << depth, 1 << (depth + 1))
    leaf_len = float(np.max(sub[leaves]))
    out = GapSet(
        (0.0, 1.0),
        gaps,
        depth=depth,
        resolution=leaf_len,
        meta={
            "family": "generated",
            "sequence": seq.to_dict(),
            "layout": "bfs-tree",
            "layout_defect": defect,
            "unrepresentable_gaps": dropped,
        },
    )
    if dropped:
        out = GapSet(
            out.window, out.gaps, depth, max(leaf_len, float(np.max(out.component_lengths))), out.meta
        )
    return out


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    """Points ``base + sum eps_j lengths[j]``, ``eps in {0, 1}^n``."""

    base: float
    lengths: tuple

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(l) for l in self.lengths))
        object.__setattr__(self, "base", float(self.base))

    @property
    def order(self) -> int:
        return len(self.lengths)

    def points(self) -> np.ndarray:
        return self.base + subset_sums(self.lengths)

    def is_valid(self, tol: float = 0.0) -> bool:
        """True when the ``2**n`` sums are pairwise distinct (beyond ``tol``)."""
        if any(l <= 0 for l in self.lengths):
            return False
        p = self.points()
        return bool(np.all(np.diff(p) > tol))

    def to_dict(self):
        return {"base": self.base, "lengths": list(self.lengths)}


def lemma5_sequence(lengths, n_max: int):
    """Increasing sequence containing an ``n``-chain for each ``n <= n_max``.

    With ``alpha_n = l_1 + .. + l_{n^2}`` the ``n``-th chain is
    ``alpha_n + sum eps_k l_k`` over ``k = n^2 + 1 .. n^2 + n``; it lies in
    ``[alpha_n, beta_n]``, ``beta_n = l_1 + .. + l_{n^2 + n}``.

    Returns ``(points, chains, intervals)``.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise ValidationError("n_max must be >= 1", field="n_max")
    ls = _check_decay(lengths)
    need = n_max * n_max + n_max
    if ls.size < need:
        raise ValidationError(f"need at least {need} lengths for n_max={n_max}, got {ls.size}", field="lengths")
    chains, intervals = [], []
    for n in range(1, n_max + 1):
        alpha = math.fsum(ls[: n * n])
        beta = math.fsum(ls[: n * n + n])
        chains.append(Chain(alpha, tuple(ls[n * n : n * n + n])))
        intervals.append((alpha, beta))
    points = np.sort(np.concatenate([c.points() for c in chains]))
    return points, chains, intervals


# ---------------------------------------------------------------------------
# Thin sets with chains of every order
# ---------------------------------------------------------------------------

LOG3 = math.log(3.0)


@dataclass(frozen=True)
class PsiSpec:
    """Gauge ``psi`` on ``(0, delta0)`` with ``psi(d) / d -> inf`` as ``d -> 0``.

    ``kind='power'``: ``psi(d) = d**param``;
    ``kind='powerlog'``: ``psi(d) = d * log(1/d)**param``;
    ``kind='tabulated'``: piecewise linear in log-log through ``table``
    (pairs ``(d, psi)``), extended below the first knot with the first slope.
    """

    kind: str
    param: float | None = None
    delta0: float = 0.5
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power", "powerlog", "tabulated"):
            raise ValidationError(f"unknown psi kind {self.kind!r}", field="psi")
        if not self.delta0 > 0:
            raise ValidationError("delta0 must be > 0", field="delta0")
        if self.kind == "powerlog" and self.delta0 > 1:
            raise ValidationError("powerlog needs delta0 <= 1", field="delta0")
        if self.kind == "tabulated":
            t = np.asarray(self.table, dtype=float)
            if t.ndim != 2 or t.shape[1] != 2 or len(t) < 2:
                raise ValidationError("table needs at least two (delta, psi) pairs", field="table")
            if np.any(t <= 0) or np.any(np.diff(t[:, 0]) <= 0):
                raise ValidationError("table must be positive with increasing delta", field="table")
            object.__setattr__(self, "table", tuple(map(tuple, t.tolist())))
            object.__setattr__(self, "delta0", float(min(self.delta0, t[-1, 0])))

    @classmethod
    def power(cls, alpha, delta0=0.5):
        return cls("power", float(alpha), delta0)

    @classmethod
    def powerlog(cls, beta, delta0=0.5):
        return cls("powerlog", float(beta), delta0)

    @classmethod
    def tabulated(cls, pairs, delta0=math.inf):
        return cls("tabulated", None, delta0, tuple(pairs))

    def _knots(self):
        t = np.asarray(self.table, dtype=float)
        return np.log(t[:, 0]), np.log(t[:, 1])

    def log_ratio(self, log_delta):
        """``log(psi(d) / d)`` as a function of ``log d``."""
        u = np.asarray(log_delta, dtype=float)
        if self.kind == "power":
            return (self.param - 1.0) * u
        if self.kind == "powerlog":
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.param * np.log(-u)
        x, y = self._knots()
        slope0 = (y[1] - y[0]) / (x[1] - x[0])
        logpsi = np.where(u < x[0], y[0] + slope0 * (u - x[0]), np.interp(u, x, y))
        return logpsi - u

    def __call__(self, delta):
        d = np.asarray(delta, dtype=float)
        return d * np.exp(self.log_ratio(np.log(d)))

    def diverges(self) -> bool:
        """Whether ``psi(d)/d -> inf`` as ``d -> 0`` for these parameters."""
        if self.kind == "power":
            return self.param is not None and 0 < self.param < 1
        if self.kind == "powerlog":
            return self.param is not None and self.param > 0
        x, y = self._knots()
        return (y[1] - y[0]) / (x[1] - x[0]) < 1

    def ratio_is_monotone(self) -> bool:
        """True when ``psi(t)/t`` is non-increasing in ``t`` on the domain."""
        if self.kind in ("power", "powerlog"):
            return self.diverges()
        x, y = self._knots()
        return bool(np.all(np.diff(y) <= np.diff(x)))

    def tilde_log_ratio(self, log_delta):
        """``log`` of ``inf_{0 < t <= d} psi(t)/t``, the monotone regularisation."""
        u = np.asarray(log_delta, dtype=float)
        if self.ratio_is_monotone():
            return self.log_ratio(u)
        x, _ = self._knots()
        knot_vals = self.log_ratio(x)
        run_min = np.minimum.accumulate(knot_vals)
        here = self.log_ratio(u)
        k = np.searchsorted(x, u, side="right") - 1
        prior = np.where(k >= 0, run_min[np.clip(k, 0, None)], np.inf)
        return np.minimum(here, prior)

    def tilde(self, delta):
        d = np.asarray(delta, dtype=float)
        return d * np.exp(self.tilde_log_ratio(np.log(d)))

    def to_dict(self):
        out = {"kind": self.kind, "param": self.param, "delta0": self.delta0}
        if self.table:
            out["table"] = [list(p) for p in self.table]
        return out


def choose_exponents(psi: PsiSpec, count: int, n_cap: int = 2**62) -> list[int]:
    """Strictly increasing ``n_1 < n_2 < ...`` with ``6 * 2**k <= psi~(3**-n_k) * 3**n_k``.

    Each ``n_k`` is the least admissible integer above ``n_{k-1}``.
    """
    if not psi.diverges():
        raise ValidationError("psi(d)/d does not tend to infinity", field="psi")
    # smallest n with 3**-n strictly inside the domain
    n_floor = max(1, math.floor(-math.log(psi.delta0) / LOG3) + 1)

    def ok(n, k):
        return float(psi.tilde_log_ratio(-n * LOG3)) >= math.log(6.0) + k * math.log(2.0)

    out, prev = [], n_floor - 1
    for k in range(1, count + 1):
        lo = prev + 1
        if ok(lo, k):
            n = lo
        else:
            hi, step = lo, 1
            while not ok(hi, k):
                lo = hi
                hi = lo + step
                step *= 2
                if hi > n_cap:
                    raise ValidationError(f"no admissible n_k found for k={k} below {n_cap}", field="K")
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if ok(mid, k):
                    hi = mid
                else:
                    lo = mid
            n = hi
        if n <= prev:
            raise ValidationError(f"n_k not strictly increasing at k={k}", field="K")
        out.append(n)
        prev = n
    return out


def _pow3(n):
    return 0.0 if n > 700 else 3.0 ** (-n)


@dataclass(frozen=True)
class ChainCertificate:
    """Structural proof that a chain has ``2**order`` distinct points.

    Lengths ``3**-e`` with strictly increasing exponents ``e`` satisfy
    ``l_{j+1} <= l_j / 3 < l_j / 2``, so all subset sums differ.
    """

    order: int
    exponents: tuple
    interval: tuple
    valid: bool

    def to_dict(self):
        return {
            "order": self.order,
            "exponents": list(self.exponents),
            "interval": list(self.interval),
            "valid": self.valid,
        }


@dataclass(frozen=True, eq=False)
class Theorem3Result:
    gapset: GapSet
    points: np.ndarray  # ideal points of S (float), sorted, with multiplicity
    limit: float
    exponents: tuple
    chains: tuple
    certificates: tuple
    psi_tilde_applied: bool
    tail_bound: float


def theorem3_set(psi: PsiSpec, K: int, max_order: int = MAX_CHAIN_ORDER) -> Theorem3Result:
    """Thin countable set carrying chains of orders ``1 .. K``.

    Lengths ``l_k = 3**-n_k`` come from :func:`choose_exponents`; the
    sequence is ``S = F_1 U .. U F_K`` as in :func:`lemma5_sequence` and the
    returned set is ``S`` plus the limit of the full sequence.
    """
    K = int(K)
    if K < 1:
        raise ValidationError("K must be >= 1", field="K")
    if K > max_order:
        raise ValidationError(f"K={K} exceeds max_order {max_order}", field="K")
    count = (K + 1) ** 2 + 1
    ns = choose_exponents(psi, count)
    ls = [_pow3(n) for n in ns]

    chains, certs, parts = [], [], []
    for n in range(1, K + 1):
        alpha = math.fsum(ls[: n * n])
        beta = math.fsum(ls[: n * n + n])
        exps = tuple(ns[n * n : n * n + n])
        ch = Chain(alpha, tuple(ls[n * n : n * n + n]))
        chains.append(ch)
        certs.append(ChainCertificate(n, exps, (alpha, beta), all(b > a for a, b in zip(exps, exps[1:]))))
        parts.append(ch.points())
    # points of S beyond F_K lie in [alpha_{K+1}, limit]
    tail_bound = 1.5 * _pow3(ns[(K + 1) ** 2])
    limit = math.fsum(ls)
    pts = np.sort(np.concatenate(parts))
    resolution = max(tail_bound, 8 * float(np.spacing(limit)))
    gs = from_points(
        np.append(pts, limit),
        depth=K,
        resolution=resolution,
        meta={
            "family": "theorem3",
            "psi": psi.to_dict(),
            "K": K,
            "exponents": list(ns),
            "ideal_points": int(pts.size + 1),
        },
    )
    return Theorem3Result(
        gapset=gs,
        points=pts,
        limit=limit,
        exponents=tuple(ns),
        chains=tuple(chains),
        certificates=tuple(certs),
        psi_tilde_applied=not psi.ratio_is_monotone(),
        tail_bound=tail_bound,
    )
