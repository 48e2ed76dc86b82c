"""Numerical probes of Littlewood-Paley behaviour on the circle.

Norms use the normalised measure ``dx / 2 pi``, so every character
``e^{ikx}`` has norm 1.  Frequency sets are gap sets scaled into integer
frequency space by ``freq_scale``; bin ``k`` belongs to the complementary
interval (band) of the scaled set that contains it.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .exceptions import AliasingError, LPLabError, ValidationError
from .fitting import ExponentFit, loglog_fit
from .sets import IN_SET, GapSet

NOISE = 1e-12  # relative magnitude below which an FFT coefficient counts as zero
EXHAUSTIVE_SIGN_CAP = 20
KHINTCHINE_EXHAUSTIVE_MAX = 12


def n_threads(requested=None) -> int:
    """Worker count: ``requested``, else ``LP_LAB_THREADS``, else 1."""
    if requested is None:
        requested = os.environ.get("LP_LAB_THREADS", "1")
    try:
        n = int(requested)
    except ValueError:
        raise ValidationError("LP_LAB_THREADS must be an integer", field="threads") from None
    return max(1, n)


def _pow2_at_least(n) -> int:
    return 1 << max(2, math.ceil(math.log2(max(n, 1))))


# ---------------------------------------------------------------------------
# Signals
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """``sum c_k e^{ikx}`` over distinct integer frequencies."""

    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=np.int64).ravel()
        c = np.asarray(self.coeffs, dtype=complex).ravel()
        if f.shape != c.shape:
            raise ValidationError("freqs and coeffs differ in length", field="coeffs")
        if np.unique(f).size != f.size:
            raise ValidationError("frequencies must be distinct", field="freqs")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms):
        terms = list(terms)
        return cls([k for k, _ in terms], [c for _, c in terms])

    @property
    def bandwidth(self) -> int:
        return int(np.max(np.abs(self.freqs))) if self.freqs.size else 0

    def samples(self, M: int) -> np.ndarray:
        if self.bandwidth >= M // 2:
            raise AliasingError(f"grid of {M} points cannot hold frequency {self.bandwidth}", field="M")
        spec = np.zeros(M, dtype=complex)
        spec[self.freqs % M] = self.coeffs
        return np.fft.ifft(spec) * M

    def l2_coefficients(self) -> float:
        return math.sqrt(math.fsum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True, eq=False)
class GridSignal:
    """Samples at ``x_j = 2 pi j / M``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if s.size < 4 or s.size & (s.size - 1):
            raise ValidationError("grid size must be a power of two >= 4", field="M")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_polynomial(cls, poly: TrigPolynomial, M: int):
        return cls(poly.samples(M))

    @property
    def M(self) -> int:
        return self.samples.size

    def coefficients(self) -> np.ndarray:
        """Fourier coefficients in FFT order (bin ``j`` is frequency ``j`` or ``j - M``)."""
        return np.fft.fft(self.samples) / self.M

    def bandwidth(self) -> int:
        c = self.coefficients()
        big = np.abs(c) > NOISE * max(float(np.max(np.abs(c))), 1e-300)
        if not np.any(big):
            return 0
        return int(np.max(np.abs(frequencies(self.M)[big])))

    def resample(self, M: int) -> "GridSignal":
        """Exact band-limited resampling onto a grid of ``M`` points."""
        if M == self.M:
            return self
        c = self.coefficients()
        k = frequencies(self.M)
        keep = np.abs(c) > 0
        if np.any(np.abs(k[keep]) >= M // 2):
            raise AliasingError(f"cannot resample to {M} points", field="M")
        spec = np.zeros(M, dtype=complex)
        spec[k[keep] % M] = c[keep]
        return GridSignal(np.fft.ifft(spec) * M)


def frequencies(M: int) -> np.ndarray:
    """Integer frequency of each FFT bin."""
    return np.fft.fftfreq(M, d=1.0 / M).astype(np.int64)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def _grid_norm(samples, p):
    a = np.abs(samples)
    if p == 2:
        return math.sqrt(float(np.mean(a * a)))
    return float(np.mean(a**p)) ** (1.0 / p)


def lp_norm(f, p: float, M: int | None = None, rtol: float = 1e-9, max_M: int = 1 << 22) -> float:
    """``(1/2pi int |f|^p)^(1/p)`` by the grid mean ``(1/M) sum |f(x_j)|^p``.

    For a polynomial with ``M`` given, the grid mean at that size is
    returned.  With ``M=None`` the grid is doubled until successive values
    agree to ``rtol`` (``|f|^p`` is only as smooth as ``f`` is far from
    zero, so convergence near real zeros is algebraic).

    A :class:`GridSignal` is taken at its own samples; a different ``M``
    resamples it, which requires it to be band-limited.
    """
    p = float(p)
    if not p >= 1 or not math.isfinite(p):
        raise ValidationError("p must lie in [1, inf)", field="p")
    if isinstance(f, GridSignal):
        if M is None or int(M) == f.M:
            return _grid_norm(f.samples, p)
        M = int(M)
        bw = f.bandwidth()
        if M < 4 * bw or M & (M - 1):
            raise AliasingError(f"M={M} must be a power of two >= 4 * bandwidth ({bw})", field="M")
        return _grid_norm(f.resample(M).samples, p)
    if not isinstance(f, TrigPolynomial):
        raise TypeError("lp_norm needs a TrigPolynomial or a GridSignal")
    bw = f.bandwidth
    at = f.samples
    base = _pow2_at_least(4 * max(bw, 1))

    if M is not None:
        M = int(M)
        if M < 4 * bw or M & (M - 1):
            raise AliasingError(f"M={M} must be a power of two >= 4 * bandwidth ({bw})", field="M")
        value = _grid_norm(at(M), p)
    elif p == int(p) and int(p) % 2 == 0:
        # |f|^p is itself a trigonometric polynomial: the grid mean is exact
        m = _pow2_at_least((int(p) + 1) * max(bw, 1) + 1)
        value = _grid_norm(at(max(m, base)), p)
    else:
        m = base
        prev = _grid_norm(at(m), p)
        while True:
            m *= 2
            value = _grid_norm(at(m), p)
            if abs(value - prev) <= rtol * value:
                break
            if m >= max_M:
                warnings.warn(f"lp_norm did not reach rtol={rtol} by M={m}", RuntimeWarning, stacklevel=2)
                break
            prev = value
    if p == 2:
        ref = f.l2_coefficients()
        if abs(value - ref) > 1e-9 * max(ref, 1.0):
            raise LPLabError(f"quadrature {value!r} disagrees with Parseval {ref!r}")
    return value


_GL_CACHE = {}


def _gauss_legendre(m):
    if m not in _GL_CACHE:
        _GL_CACHE[m] = np.polynomial.legendre.leggauss(m)
    return _GL_CACHE[m]


def dirichlet_norm(N: int, p: float, nodes: int = 48) -> float:
    """``|| sum_{k=1}^N e^{ikx} ||_p`` by Gauss-Legendre between consecutive zeros.

    ``|D_N(x)| = |sin(Nx/2) / sin(x/2)|`` vanishes at ``2 pi j / N``; on each
    panel between zeros the integrand is smooth up to the endpoints, where
    Gauss-Legendre still converges fast.
    """
    N, p = int(N), float(p)
    if N < 1:
        raise ValidationError("N must be >= 1", field="N")
    if not p >= 1:
        raise ValidationError("p must lie in [1, inf)", field="p")
    if N == 1:
        return 1.0
    t, w = _gauss_legendre(nodes)
    h = 2 * math.pi / N
    # panels j = 0..N-1 on [0, 2pi]; symmetric about pi, so half suffices
    half = N // 2
    js = np.arange(half)
    x = (js[:, None] + 0.5 * (t[None, :] + 1.0)) * h
    vals = np.abs(np.sin(N * x / 2) / np.sin(x / 2)) ** p
    total = 2.0 * float(np.sum(vals @ w)) * (h / 2)
    if N % 2:
        xm = (half + 0.5 * (t + 1.0)) * h
        total += float(np.abs(np.sin(N * xm / 2) / np.sin(xm / 2)) ** p @ w) * (h / 2)
    return (total / (2 * math.pi)) ** (1.0 / p)


def dirichlet_scaling(p: float, N_list, nodes: int = 48) -> ExponentFit:
    """Fit ``|| D_N ||_p ~ c N**e``; the expected exponent is ``1/q = 1 - 1/p``."""
    p = float(p)
    if not p > 1:
        raise ValidationError("p must be > 1", field="p")
    Ns = np.asarray(list(N_list), dtype=np.int64)
    if Ns.size < 4:
        raise ValidationError("N_list needs at least 4 entries", field="N_list")
    norms = [dirichlet_norm(int(n), p, nodes) for n in Ns]
    q = p / (p - 1.0)
    return loglog_fit(Ns, norms, extras={"p": p, "q": q, "target_exponent": 1.0 / q, "N": Ns.tolist(), "norms": norms})


# ---------------------------------------------------------------------------
# Square function
# ---------------------------------------------------------------------------


def _scaled(S: GapSet, s: float) -> GapSet:
    """``S`` scaled by ``s``, endpoints within 1e-9 of an integer snapped to it."""
    def snap(v):
        r = np.round(v)
        return np.where(np.abs(v - r) <= 1e-9 * np.maximum(1.0, np.abs(v)), r, v)

    w = snap(np.asarray(S.window, dtype=float) * s)
    g = snap(S.gaps * s)
    # gaps thinner than the snapping tolerance collapse and cannot hold a bin
    g = g[g[:, 1] > g[:, 0]]
    return GapSet((w[0], w[1]), g, S.depth, S.resolution * s, S.meta)


BEYOND = -2  # label for bins outside the admissible bandwidth


def band_labels(S: GapSet, M: int, freq_scale: float = 1.0, bandwidth: int | None = None) -> np.ndarray:
    """Band of every FFT bin; ``IN_SET`` for bins on the set, ``BEYOND`` past ``bandwidth``."""
    if bandwidth is None:
        bandwidth = M // 4
    k = frequencies(M)
    labels = _scaled(S, float(freq_scale)).locate(k.astype(float))
    labels[np.abs(k) > bandwidth] = BEYOND
    return labels


def band_pieces(f: GridSignal, S: GapSet, freq_scale: float = 1.0) -> dict:
    """``{band: S_band f}`` for every band carrying a nonzero coefficient."""
    c = f.coefficients()
    labels = band_labels(S, f.M, freq_scale)
    big = np.abs(c) > NOISE * max(float(np.max(np.abs(c))), 1e-300)
    if np.any(big & (labels == BEYOND)):
        raise AliasingError(f"signal exceeds bandwidth {f.M // 4} of the {f.M}-point grid", field="M")
    if np.any(big & (labels == IN_SET)):
        k = int(frequencies(f.M)[np.flatnonzero(big & (labels == IN_SET))[0]])
        raise ValidationError(f"nonzero coefficient at frequency {k}, which lies on the set", field="f")
    pieces = {}
    for b in np.unique(labels[big]).tolist():
        mask = labels == b
        pieces[b] = GridSignal(np.fft.ifft(np.where(mask, c, 0.0)) * f.M)
    return pieces


def square_function(f: GridSignal, S: GapSet, freq_scale: float = 1.0) -> GridSignal:
    """``S(f) = (sum_k |S_k f|^2)^(1/2)``, one ``S_k`` per complementary interval."""
    acc = np.zeros(f.M)
    for piece in band_pieces(f, S, freq_scale).values():
        acc += np.abs(piece.samples) ** 2
    return GridSignal(np.sqrt(acc))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    """Outcome of one numerical experiment."""

    experiment: str
    seed: int | None
    params: dict
    scalars: dict
    flags: dict = field(default_factory=dict)
    trials: int | None = None
    table: list = field(default_factory=list)

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "params": self.params,
            "scalars": self.scalars,
            "flags": self.flags,
            "table": self.table,
        }


# ---------------------------------------------------------------------------
# Frame probe
# ---------------------------------------------------------------------------


def _adversaries(labels, k, comps_scaled):
    """Deterministic test signals, as ``{name: coefficient array}`` in FFT order."""
    ok = labels >= 0
    out = {}
    if not np.any(ok):
        return out
    bands, counts = np.unique(labels[ok], return_counts=True)
    widest = bands[np.argmax(counts)]
    out["single_band"] = np.where(labels == widest, 1.0 + 0j, 0j)
    out["all_ones"] = np.where(ok, 1.0 + 0j, 0j)
    order = np.argsort(k[ok], kind="stable")
    alt = np.zeros(k.size, dtype=complex)
    idx = np.flatnonzero(ok)[order]
    alt[idx] = np.where(np.arange(idx.size) % 2 == 0, 1.0, -1.0)
    out["alternating"] = alt
    # first admissible bin to the right of each component: a shifted copy of
    # the set that meets every band at most once
    ks = k[ok]
    ks_sorted = np.sort(ks)
    right = np.searchsorted(ks_sorted, comps_scaled[:, 1], side="right")
    right = right[right < ks_sorted.size]
    chosen = np.unique(ks_sorted[right])
    if chosen.size:
        sel = np.isin(k, chosen) & ok
        lab = labels[sel]
        if np.unique(lab).size == lab.size:
            out["shifted_components"] = np.where(sel, 1.0 + 0j, 0j)
    return out


def _ratio(coeffs, labels, M, p):
    f = GridSignal(np.fft.ifft(coeffs) * M)
    nf = _grid_norm(f.samples, p)
    acc = np.zeros(M)
    for b in np.unique(labels[np.abs(coeffs) > 0]).tolist():
        piece = np.fft.ifft(np.where(labels == b, coeffs, 0.0)) * M
        acc += np.abs(piece) ** 2
    return _grid_norm(np.sqrt(acc), p) / nf


def frame_probe(S: GapSet, p: float, trials: int, M: int, seed: int, freq_scale: float = 1.0, threads=None):
    """Empirical range of ``||S(f)||_p / ||f||_p`` over random and adversarial ``f``.

    Random signals carry independent standard complex Gaussian coefficients
    on every admissible bin (inside the bandwidth ``M/4`` and off the set);
    trial ``t`` draws from ``default_rng(seed + t)``.  The minimum and
    maximum are an empirical frame range, not the LP constants.

    Returns ``(c1_hat, c2_hat, report)``.
    """
    p = float(p)
    if not p >= 1:
        raise ValidationError("p must lie in [1, inf)", field="p")
    trials = int(trials)
    if trials < 1:
        raise ValidationError("trials must be >= 1", field="trials")
    M = int(M)
    if M < 8 or M & (M - 1):
        raise ValidationError("M must be a power of two >= 8", field="M")
    labels = band_labels(S, M, freq_scale)
    ok = labels >= 0
    n_adm = int(np.count_nonzero(ok))
    if n_adm == 0:
        raise ValidationError("no admissible frequency bins", field="freq_scale")
    k = frequencies(M)
    comps = _scaled(S, float(freq_scale)).components()

    def trial(t):
        rng = np.random.default_rng(seed + t)
        z = rng.standard_normal(n_adm) + 1j * rng.standard_normal(n_adm)
        coeffs = np.zeros(M, dtype=complex)
        coeffs[ok] = z / math.sqrt(2.0)
        return _ratio(coeffs, labels, M, p)

    workers = n_threads(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            random_ratios = list(ex.map(trial, range(trials)))
    else:
        random_ratios = [trial(t) for t in range(trials)]
    adversarial = {name: _ratio(c, labels, M, p) for name, c in _adversaries(labels, k, comps).items()}
    values = np.array(random_ratios + list(adversarial.values()))
    c1, c2 = float(values.min()), float(values.max())
    report = ProbeReport(
        experiment="frame_probe",
        seed=int(seed),
        trials=trials,
        params={"p": p, "M": M, "freq_scale": float(freq_scale), "bandwidth": M // 4},
        scalars={
            "c1_hat": c1,
            "c2_hat": c2,
            "spread": c2 / c1,
            "random_min": float(min(random_ratios)),
            "random_max": float(max(random_ratios)),
            "random_mean": math.fsum(random_ratios) / trials,
            "adversarial": adversarial,
            "admissible_bins": n_adm,
            "bands_in_play": int(np.unique(labels[ok]).size),
        },
        flags={"label": "empirical frame range", "residual": S.residual, "resolution": S.resolution},
    )
    return c1, c2, report


# ---------------------------------------------------------------------------
# Rademacher signs and Khintchine
# ---------------------------------------------------------------------------


def _sign_patterns(n, start, stop):
    """Rows of +-1 for pattern indices in ``[start, stop)``; bit ``j`` flips sign ``j + 1``.

    The first sign is held at +1 (a global flip leaves ``|.|`` unchanged).
    """
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(n - 1, dtype=np.int64)[None, :]) & 1
    signs = np.ones((idx.shape[0], n))
    signs[:, 1:] = 1.0 - 2.0 * bits
    return signs


def khintchine_constant(p: float) -> float:
    """Sharp real Khintchine constant ``A_p`` (Haagerup) for ``1 <= p < 2``; 1 for ``p >= 2``."""
    if p >= 2:
        return 1.0
    a = 2.0 ** (0.5 - 1.0 / p)
    b = math.sqrt(2.0) * (special.gamma((p + 1) / 2) / math.sqrt(math.pi)) ** (1.0 / p)
    return min(a, b)


def khintchine_ratio(c_list, p: float, mode: str = "auto", trials: int = 100_000, seed: int = 0) -> float:
    """``(E |sum c_j r_j|^p)^(1/p) / (sum c_j^2)^(1/2)`` over random signs.

    Exhaustive over all sign patterns for up to 12 coefficients in ``auto``
    mode, Monte Carlo beyond.  The coefficients are reduced to sorted
    absolute values first, so permutations and sign flips give identical
    results.
    """
    return _khintchine(c_list, p, mode, trials, seed)[0]


def _khintchine(c_list, p, mode, trials, seed):
    p = float(p)
    if not 1 <= p < 2:
        raise ValidationError("p must lie in [1, 2)", field="p")
    c = np.sort(np.abs(np.asarray(c_list, dtype=float).ravel()))[::-1]
    if c.size == 0 or not np.any(c > 0):
        raise ValidationError("coefficients must not all vanish", field="c_list")
    if mode == "auto":
        mode = "exhaustive" if c.size <= KHINTCHINE_EXHAUSTIVE_MAX else "montecarlo"
    l2 = math.sqrt(math.fsum(c * c))
    if mode == "exhaustive":
        if c.size > EXHAUSTIVE_SIGN_CAP:
            raise ValidationError(f"exhaustive mode is capped at {EXHAUSTIVE_SIGN_CAP} terms", field="mode")
        total = 1 << (c.size - 1)
        acc, step = [], 1 << 16
        for start in range(0, total, step):
            s = _sign_patterns(c.size, start, min(total, start + step))
            acc.append(math.fsum(np.abs(s @ c) ** p))
        mean = math.fsum(acc) / total
        return mean ** (1.0 / p) / l2, 0.0
    if mode != "montecarlo":
        raise ValidationError(f"unknown mode {mode!r}", field="mode")
    rng = np.random.default_rng(seed)
    s = rng.integers(0, 2, size=(int(trials), c.size)) * 2.0 - 1.0
    vals = np.abs(s @ c) ** p
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    # delta method for the p-th root
    ratio = mean ** (1.0 / p) / l2
    return ratio, ratio * se / (p * mean)


def rademacher_experiment(k_list, N: int, p: float, mode: str = "auto", trials: int = 2000, seed: int = 0, M=None):
    """Random-sign sums ``sum +-e^{i k_j x}`` against the Dirichlet kernel of length ``N``.

    Reports the sign average ``(E ||sum r_j e^{ik_j x}||_p^p)^(1/p)``, the
    right-hand side ``||D_N||_p``, the Khintchine lower bound
    ``A_p 2^(-1/p) nu^(1/2)`` for unimodular complex coefficients, and
    ``nu^(1/2) / N^(1/q)``.
    """
    ks = np.asarray(list(k_list), dtype=np.int64)
    nu = ks.size
    p = float(p)
    if nu == 0:
        raise ValidationError("k_list must be non-empty", field="k_list")
    if np.unique(ks).size != nu:
        raise ValidationError("k_list entries must be distinct", field="k_list")
    if not p >= 1:
        raise ValidationError("p must lie in [1, inf)", field="p")
    N = int(N)
    if mode == "auto":
        mode = "exhaustive" if nu <= EXHAUSTIVE_SIGN_CAP else "montecarlo"
    if mode == "exhaustive" and nu > EXHAUSTIVE_SIGN_CAP:
        raise ValidationError(f"exhaustive mode is capped at {EXHAUSTIVE_SIGN_CAP} frequencies", field="k_list")
    bw = int(np.max(np.abs(ks)))
    if M is None:
        M = _pow2_at_least(16 * max(bw, 1))
    M = int(M)
    if M < 4 * bw:
        raise AliasingError(f"M={M} too small for frequency {bw}", field="M")
    x = 2 * np.pi * np.arange(M) / M
    E = np.exp(1j * ks[:, None] * x[None, :])
    batch = max(1, (1 << 22) // M)

    def pattern_norms(signs):
        vals = np.abs(signs @ E)
        return np.mean(vals**p, axis=1)

    if mode == "exhaustive":
        total = 1 << (nu - 1)
        chunks = []
        for start in range(0, total, batch):
            chunks.append(pattern_norms(_sign_patterns(nu, start, min(total, start + batch))))
        pp = np.concatenate(chunks)
        stderr = 0.0
        n_eval = total
    elif mode == "montecarlo":
        rng = np.random.default_rng(seed)
        chunks = []
        for start in range(0, int(trials), batch):
            m = min(batch, int(trials) - start)
            s = rng.integers(0, 2, size=(m, nu)) * 2.0 - 1.0
            chunks.append(pattern_norms(s))
        pp = np.concatenate(chunks)
        stderr = float(pp.std(ddof=1) / math.sqrt(pp.size)) if pp.size > 1 else float("nan")
        n_eval = int(pp.size)
    else:
        raise ValidationError(f"unknown mode {mode!r}", field="mode")
    mean_pp = math.fsum(pp) / pp.size
    avg = mean_pp ** (1.0 / p)
    rhs = dirichlet_norm(N, p)
    q = p / (p - 1.0) if p > 1 else math.inf
    kh = khintchine_constant(p) * (2.0 ** (-1.0 / p) if p < 2 else 1.0) * math.sqrt(nu)
    diag = math.sqrt(nu) / (N ** (1.0 / q) if math.isfinite(q) else 1.0)
    return ProbeReport(
        experiment="rademacher",
        seed=int(seed) if mode == "montecarlo" else None,
        trials=n_eval,
        params={"k_list": ks.tolist(), "N": N, "p": p, "mode": mode, "M": M},
        scalars={
            "nu": nu,
            "average_norm": avg,
            "average_pnorm_p": mean_pp,
            "stderr_pnorm_p": stderr,
            "pattern_norm_min": float(np.min(pp)) ** (1.0 / p),
            "pattern_norm_max": float(np.max(pp)) ** (1.0 / p),
            "dirichlet_rhs": rhs,
            "ratio_to_rhs": avg / rhs,
            "khintchine_lower": kh,
            "lemma3_diagnostic": diag,
        },
        flags={"khintchine_holds": avg >= kh * (1 - 1e-9)},
    )


# ---------------------------------------------------------------------------
# Chain norm ratios
# ---------------------------------------------------------------------------


def one_plus_char_norm(p: float) -> float:
    """``|| 1 + e^{it} ||_p`` by adaptive quadrature of ``(2 cos(t/2))^p`` on ``[0, pi]``."""
    p = float(p)
    if not p >= 1:
        raise ValidationError("p must be >= 1", field="p")
    val, _ = integrate.quad(lambda t: (2.0 * math.cos(t / 2.0)) ** p, 0.0, math.pi, epsabs=0, epsrel=1e-13, limit=200)
    return (val / math.pi) ** (1.0 / p)


def chain_sum_norm_nd(n: int, p: float, nodes: int | None = None) -> float:
    """``|| sum_{eps in {0,1}^n} e^{i(eps, t)} ||_{L^p(T^n)}`` by tensor Gauss-Legendre.

    The sum is formed term by term (not as a product); its zero set lies on
    the faces ``t_j = +-pi`` where Gauss-Legendre has no nodes.
    """
    n, p = int(n), float(p)
    if not 1 <= n <= 3:
        raise ValidationError("direct quadrature is limited to n <= 3", field="n")
    if nodes is None:
        nodes = {1: 400, 2: 400, 3: 120}[n]
    x, w = _gauss_legendre(nodes)
    t = math.pi * x
    grids = np.meshgrid(*([t] * n), indexing="ij")
    wt = w
    for _ in range(n - 1):
        wt = np.multiply.outer(wt, w)
    total = np.zeros(grids[0].shape, dtype=complex)
    for eps in range(1 << n):
        phase = sum(((eps >> j) & 1) * grids[j] for j in range(n))
        total += np.exp(1j * phase) if not np.isscalar(phase) else np.exp(1j * phase) * np.ones_like(total)
    integral = float(np.sum(wt * np.abs(total) ** p)) / (2.0**n)
    return integral ** (1.0 / p)


def chain_ratio(n: int, p: float, cross_check: bool = True):
    """``r_p = ||1 + e^{it}||_2 / ||1 + e^{it}||_p`` and ``R_n = r_p**n``.

    For ``n <= 3`` the product form is checked against direct n-dimensional
    quadrature of the chain sum; the relative gap is returned as well.
    Returns ``(r_p, R_n, check)`` with ``check`` ``None`` when skipped.
    """
    n, p = int(n), float(p)
    if n < 1:
        raise ValidationError("n must be >= 1", field="n")
    if not p >= 1:
        raise ValidationError("p must be >= 1", field="p")
    r = math.sqrt(2.0) / one_plus_char_norm(p)
    R = r**n
    check = None
    if cross_check and n <= 3:
        direct = (2.0 ** (n / 2.0)) / chain_sum_norm_nd(n, p)
        check = abs(direct - R) / R
    return r, R, check


def lemma4_growth(n_list, p: float, prior_bound: float | None = None) -> ProbeReport:
    """Table of ``R_n = r_p**n``; flags when no fixed constant can dominate it.

    ``R_n`` grows without bound exactly when ``r_p > 1``, which is the case
    for every ``p < 2``.
    """
    p = float(p)
    if not 1 <= p < 2 + 1e-15:
        raise ValidationError("p must lie in [1, 2]", field="p")
    r = math.sqrt(2.0) / one_plus_char_norm(p)
    ns = sorted(int(n) for n in n_list)
    rows = [{"n": n, "R_n": r**n} for n in ns]
    values = [row["R_n"] for row in rows]
    increasing = all(b > a for a, b in zip(values, values[1:]))
    unbounded = r > 1 + 1e-12
    exceeded = None
    if prior_bound is not None:
        exceeded = next((n for n, v in zip(ns, values) if v > prior_bound), None)
    return ProbeReport(
        experiment="lemma4_growth",
        seed=None,
        params={"p": p, "n_list": ns},
        scalars={"r_p": r, "closed_form_r_p": math.sqrt(2.0) / closed_form_one_plus_char_norm(p)},
        flags={
            "strictly_increasing": increasing,
            "no_uniform_constant": unbounded,
            "first_n_exceeding_prior_bound": exceeded,
        },
        table=rows,
    )


def closed_form_one_plus_char_norm(p: float) -> float:
    """``||1 + e^{it}||_p = 2 (Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1)))^(1/p)``."""
    p = float(p)
    return 2.0 * (special.gamma((p + 1) / 2) / (math.sqrt(math.pi) * special.gamma(p / 2 + 1))) ** (1.0 / p)
