import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lp_lab import (
    GridSignal,
    TrigPolynomial,
    cantor_triadic,
    chain_ratio,
    dirichlet_norm,
    dirichlet_scaling,
    dyadic_set,
    frame_probe,
    from_gaps,
    khintchine_ratio,
    lemma4_growth,
    lp_norm,
    max_splitting_subset,
    APSpec,
    rademacher_experiment,
    square_function,
    sum_set,
)
from lp_lab.exceptions import AliasingError, ValidationError
from lp_lab.fourier import (
    band_pieces,
    chain_sum_norm_nd,
    closed_form_one_plus_char_norm,
    khintchine_constant,
    one_plus_char_norm,
)


def dirichlet(N):
    return TrigPolynomial(np.arange(1, N + 1), np.ones(N))


@st.composite
def polynomials(draw, max_freq=24):
    n = draw(st.integers(1, 8))
    freqs = draw(st.lists(st.integers(-max_freq, max_freq), min_size=n, max_size=n, unique=True))
    re = draw(st.lists(st.floats(-2, 2), min_size=n, max_size=n))
    im = draw(st.lists(st.floats(-2, 2), min_size=n, max_size=n))
    c = np.array(re) + 1j * np.array(im)
    if np.all(np.abs(c) < 1e-3):
        c[0] = 1.0
    return TrigPolynomial(freqs, c)


# ---------------------------------------------------------------- lp_norm


@pytest.mark.parametrize("p", [1, 4 / 3, 2, 3.5, 7])
def test_character_has_unit_norm(p):
    assert lp_norm(TrigPolynomial([5], [1]), p) == pytest.approx(1.0, abs=1e-12)


def test_one_plus_character_l1():
    assert lp_norm(TrigPolynomial([0, 1], [1, 1]), 1) == pytest.approx(4 / math.pi, rel=1e-8)


def test_parseval_cross_check():
    assert lp_norm(dirichlet(8), 2) == pytest.approx(math.sqrt(8), rel=1e-14)
    assert lp_norm(dirichlet(8), 2, M=32) == pytest.approx(math.sqrt(8), rel=1e-14)


def test_aliasing_and_p_errors():
    with pytest.raises(AliasingError):
        lp_norm(dirichlet(8), 1.5, M=16)
    with pytest.raises(ValidationError):
        lp_norm(dirichlet(8), 0.5)


@given(polynomials(), st.floats(1.0, 3.0), st.floats(0.05, 2.0))
@settings(max_examples=40, deadline=None)
def test_norm_monotone_in_p(f, p, dp):
    M = 1024
    assert lp_norm(f, p, M) <= lp_norm(f, p + dp, M) * (1 + 1e-12)


@pytest.mark.parametrize("N,p", [(4, 1.0), (16, 4 / 3), (32, 1.5), (16, 3.0)])
def test_grid_refinement_invariant(N, p):
    f = dirichlet(N)
    adaptive = lp_norm(f, p)
    # further doubling past the converged grid moves the value by < 1e-6
    for M in (1 << 18, 1 << 19):
        assert abs(lp_norm(f, p, M) - adaptive) < 1e-6 * adaptive


def test_even_power_grid_is_exact():
    f = TrigPolynomial([0, 3, 7], [1, 2j, -0.5])
    assert lp_norm(f, 4, M=32) == pytest.approx(lp_norm(f, 4, M=1 << 12), rel=1e-13)


def test_grid_signal_input():
    f = TrigPolynomial([1, 4], [1, 1])
    g = GridSignal.from_polynomial(f, 16)
    assert lp_norm(g, 1.5, M=1 << 16) == pytest.approx(lp_norm(f, 1.5, M=1 << 16), rel=1e-12)
    assert lp_norm(g, 2) == pytest.approx(math.sqrt(2), rel=1e-14)
    assert g.bandwidth() == 4


# ---------------------------------------------------------------- Dirichlet kernel


@pytest.mark.parametrize("N", [1, 2, 5, 16, 100, 1024])
def test_dirichlet_l4_closed_form(N):
    # ||D_N||_4^4 counts solutions of a + b = c + d in [1, N]: (2N^3 + N) / 3
    assert dirichlet_norm(N, 4) == pytest.approx(((2 * N**3 + N) / 3) ** 0.25, rel=1e-12)


@pytest.mark.parametrize("N", [3, 8, 33])
@pytest.mark.parametrize("p", [1.0, 4 / 3, 2.5])
def test_dirichlet_panels_match_grid(N, p):
    assert dirichlet_norm(N, p) == pytest.approx(lp_norm(dirichlet(N), p), rel=1e-7)


def test_dirichlet_scaling_exponents():
    Ns = [2**k for k in range(4, 13)]
    fit = dirichlet_scaling(4 / 3, Ns)
    assert fit.exponent == pytest.approx(0.25, abs=0.03)
    assert fit.extras["target_exponent"] == pytest.approx(0.25)
    assert dirichlet_scaling(2, Ns).exponent == pytest.approx(0.5, abs=1e-6)
    assert dirichlet_scaling(4, Ns).exponent == pytest.approx(0.75, abs=0.01)


def test_dirichlet_scaling_needs_four_points():
    with pytest.raises(ValidationError):
        dirichlet_scaling(1.5, [4, 8, 16])
    with pytest.raises(ValidationError):
        dirichlet_scaling(1.0, [4, 8, 16, 32])


# ---------------------------------------------------------------- square function


def test_two_dyadic_bands_give_constant():
    f = GridSignal.from_polynomial(TrigPolynomial([3, 5], [1, 1]), 64)
    Sf = square_function(f, dyadic_set(0, 3))
    assert np.allclose(Sf.samples, math.sqrt(2), atol=1e-12)


def test_single_band_is_modulus():
    f = GridSignal.from_polynomial(TrigPolynomial([5, 6, 7], [1, -2j, 0.5]), 64)
    Sf = square_function(f, dyadic_set(0, 3))
    assert np.allclose(Sf.samples, np.abs(f.samples), atol=1e-12)


def test_bin_on_set_is_rejected():
    f = GridSignal.from_polynomial(TrigPolynomial([4], [1]), 64)
    with pytest.raises(ValidationError):
        square_function(f, dyadic_set(0, 3))


def test_bandwidth_violation_is_aliasing():
    f = GridSignal.from_polynomial(TrigPolynomial([20], [1]), 64)
    with pytest.raises(AliasingError):
        square_function(f, dyadic_set(0, 5))


def admissible_signal(S, M, rng, freq_scale=1.0):
    from lp_lab.fourier import band_labels

    labels = band_labels(S, M, freq_scale)
    c = np.zeros(M, dtype=complex)
    ok = labels >= 0
    c[ok] = rng.standard_normal(ok.sum()) + 1j * rng.standard_normal(ok.sum())
    return GridSignal(np.fft.ifft(c) * M)


@pytest.mark.parametrize("S,scale", [(dyadic_set(0, 8), 1.0), (cantor_triadic(4), 3.0**5), (from_gaps((-3, 5), [(-1, 2)]), 4.0)])
@pytest.mark.parametrize("seed", range(5))
def test_parseval_and_mask_completeness(S, scale, seed):
    rng = np.random.default_rng(seed)
    f = admissible_signal(S, 2048, rng, scale)
    Sf = square_function(f, S, scale)
    assert lp_norm(Sf, 2, M=2048) == pytest.approx(lp_norm(f, 2, M=2048), rel=1e-9)
    total = sum(piece.samples for piece in band_pieces(f, S, scale).values())
    assert np.max(np.abs(total - f.samples)) < 1e-9 * np.max(np.abs(f.samples))


# ---------------------------------------------------------------- frame probe


@pytest.mark.parametrize("seed", [0, 7])
def test_frame_probe_p2_is_exactly_one(seed):
    c1, c2, rep = frame_probe(dyadic_set(0, 8), 2, 10, 2048, seed)
    assert c1 == pytest.approx(1, abs=1e-9) and c2 == pytest.approx(1, abs=1e-9)
    assert rep.seed == seed and rep.trials == 10
    assert rep.flags["label"] == "empirical frame range"


def test_frame_probe_parallel_matches_serial():
    S = cantor_triadic(3)
    a = frame_probe(S, 4 / 3, 24, 512, 3, freq_scale=81.0, threads=1)
    b = frame_probe(S, 4 / 3, 24, 512, 3, freq_scale=81.0, threads=4)
    assert a[0] == b[0] and a[1] == b[1]
    assert a[2].to_dict() == b[2].to_dict()


def test_frame_probe_needs_admissible_bins():
    with pytest.raises(ValidationError):
        frame_probe(from_gaps((-1000, 1000), [(0.25, 0.75)]), 2, 3, 64, 0)


def test_frame_probe_stable_under_bandwidth_doubling():
    S = dyadic_set(0, 10)
    r1 = frame_probe(S, 4 / 3, 200, 8192, 0)
    r2 = frame_probe(S, 4 / 3, 200, 16384, 0)
    s1, s2 = r1[1] / r1[0], r2[1] / r2[0]
    assert math.isfinite(s1) and abs(s2 - s1) <= 0.1 * s1


def test_frame_spread_grows_with_chain_order():
    spreads = []
    for n in range(2, 7):
        S = sum_set([float(3 ** (n - 1 - k)) for k in range(n)])
        M = 1 << math.ceil(math.log2(4 * S.window[1] + 8))
        c1, c2, _ = frame_probe(S, 4 / 3, 60, M, 0)
        spreads.append(c2 / c1)
    assert all(b >= a for a, b in zip(spreads, spreads[1:]))


# ---------------------------------------------------------------- Rademacher / Khintchine


def test_rademacher_single_frequency():
    rep = rademacher_experiment([1], 16, 2)
    assert rep.scalars["average_norm"] == pytest.approx(1.0)
    assert rep.scalars["dirichlet_rhs"] == pytest.approx(4.0)


def test_rademacher_orthogonal_patterns():
    rep = rademacher_experiment([3, 6, 9, 12, 15], 32, 2)
    s = rep.scalars
    assert s["pattern_norm_min"] == pytest.approx(math.sqrt(5), rel=1e-12)
    assert s["pattern_norm_max"] == pytest.approx(math.sqrt(5), rel=1e-12)
    assert rep.trials == 16


def test_rademacher_dyadic_diagnostic():
    N = 256
    nu, subset, _ = max_splitting_subset(dyadic_set(0, 12), APSpec(0, 1, N))
    rep = rademacher_experiment([int(k) for k in subset], N, 4 / 3)
    assert rep.scalars["nu"] == nu
    assert math.sqrt(nu) <= 2 * N**0.25
    assert rep.flags["khintchine_holds"]
    assert rep.scalars["average_norm"] <= rep.scalars["dirichlet_rhs"]


def test_rademacher_montecarlo_close_to_exhaustive():
    ks = [1, 2, 4, 8, 16, 32, 64]
    ex = rademacher_experiment(ks, 64, 1.5)
    mc = rademacher_experiment(ks, 64, 1.5, mode="montecarlo", trials=4000, seed=11)
    assert mc.seed == 11 and mc.trials == 4000
    se = mc.scalars["stderr_pnorm_p"]
    assert abs(mc.scalars["average_pnorm_p"] - ex.scalars["average_pnorm_p"]) < 5 * se


def test_rademacher_cap():
    with pytest.raises(ValidationError):
        rademacher_experiment(list(range(1, 23)), 64, 1.5, mode="exhaustive")


def test_khintchine_ones10_exhaustive_oracle():
    ref = sum(math.comb(10, k) * abs(10 - 2 * k) for k in range(11)) / 2**10 / math.sqrt(10)
    assert khintchine_ratio(np.ones(10), 1) == pytest.approx(ref, abs=1e-12)


def test_khintchine_single_term():
    assert khintchine_ratio([1, 0, 0, 0], 1.3) == pytest.approx(1.0, abs=1e-15)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=9), st.floats(1.0, 1.99), st.randoms())
@settings(max_examples=60, deadline=None)
def test_khintchine_invariance_and_range(c, p, rnd):
    if not any(abs(x) > 1e-6 for x in c):
        return
    r = khintchine_ratio(c, p)
    assert khintchine_constant(p) * 0.999 <= r <= 1 + 1e-12
    shuffled = [x * rnd.choice((-1, 1)) for x in c]
    rnd.shuffle(shuffled)
    assert khintchine_ratio(shuffled, p) == r


def test_khintchine_errors():
    with pytest.raises(ValidationError):
        khintchine_ratio([1, 1], 2.0)
    with pytest.raises(ValidationError):
        khintchine_ratio([0, 0], 1.5)


def test_khintchine_montecarlo():
    c = np.linspace(1, 2, 14)
    mc = khintchine_ratio(c, 1.2, trials=200_000, seed=5)
    ex = khintchine_ratio(c, 1.2, mode="exhaustive")
    assert mc == pytest.approx(ex, rel=5e-3)


# ---------------------------------------------------------------- chain ratios


@pytest.mark.parametrize("p", [1, 1.1, 4 / 3, 1.5, 1.9, 2, 3, 6.5])
def test_one_plus_char_closed_form(p):
    assert one_plus_char_norm(p) == pytest.approx(closed_form_one_plus_char_norm(p), rel=1e-12)


def test_chain_ratio_values():
    r, R, check = chain_ratio(1, 1)
    assert r == pytest.approx(math.pi / (2 * math.sqrt(2)), abs=1e-12)
    r2, R2, _ = chain_ratio(5, 2)
    assert r2 == pytest.approx(1.0, abs=1e-13) and R2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("p", [1, 4 / 3, 1.7])
def test_factorization_matches_nd_quadrature(n, p):
    direct = chain_sum_norm_nd(n, p)
    assert direct == pytest.approx(one_plus_char_norm(p) ** n, rel=1e-4)
    assert chain_ratio(n, p)[2] < 1e-4


def test_lemma4_growth():
    rep = lemma4_growth([20], 1)
    assert rep.table[0]["R_n"] == pytest.approx((math.pi / (2 * math.sqrt(2))) ** 20, rel=1e-12)
    assert rep.table[0]["R_n"] == pytest.approx(8.16, abs=0.01)
    flat = lemma4_growth(range(1, 8), 2)
    assert all(row["R_n"] == pytest.approx(1.0, abs=1e-12) for row in flat.table)
    assert not flat.flags["no_uniform_constant"]
    rising = lemma4_growth(range(1, 21), 4 / 3, prior_bound=1.5)
    assert rising.flags["strictly_increasing"] and rising.flags["no_uniform_constant"]
    assert rising.flags["first_n_exceeding_prior_bound"] is not None
