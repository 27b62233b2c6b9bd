import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmaxent.errors import DomainError, InfiniteTemperature
from qmaxent.limits import oscillator_bg_beta, oscillator_bg_probabilities
from qmaxent.oracle import brute_force, value_curve
from qmaxent.qmath import EntropicParams, entropy_value, scale_factor
from qmaxent.solver import (admissible_interval, distribution, multipliers, ratios, residual,
                            solve, solve_beta, temperature)
from qmaxent.spectra import (beta_positivity_margin, box, custom, hydrogen, oscillator,
                             uniform_grid)


def implied_beta(p, e, U, q):
    """beta reproducing the ratio p_3/p_1 of a three-level distribution."""
    r = (p[2] / p[0]) ** (q - 1)
    c = (r - 1) / (e[2] - U + U * r)
    return c / (1 - q)


# -- residual ---------------------------------------------------------------

def test_residual_zero_on_balanced_spectrum(two_level):
    for q in (0.2, 0.7, 1.0):
        assert residual(two_level, 0.5, q, 0.0) == 0.0


def test_residual_diverges_at_endpoint():
    sp = oscillator(30, 1.0)
    U, q = 2.0, 0.5
    _, hi = admissible_interval(sp, U, q)
    vals = [residual(sp, U, q, hi * (1 - t)) for t in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < -1e6
    assert residual(sp, U, q, hi * (1 - 1e-12), normalized=True) == pytest.approx(-1, abs=1e-3)


def test_residual_vanishes_at_oracle_beta(three_level):
    U, q = 0.3, 0.5
    o = brute_force(three_level, U, q)
    b = implied_beta(o.p, three_level.energies, U, q)
    assert abs(residual(three_level, U, q, b)) < 1e-9


def test_residual_outside_interval_raises(three_level):
    with pytest.raises(DomainError):
        residual(three_level, 0.3, 0.5, 1.0 / (0.5 * 0.3))


# -- solve_beta and distribution -----------------------------------------

def test_beta_zero_on_balanced_spectrum(two_level):
    assert solve_beta(two_level, 0.5, 0.7) == 0.0


def test_uniform_grid_beta_near_continuum_value():
    b = solve_beta(uniform_grid(6001, 30.0, 1), 1.0, 0.75)
    assert b == pytest.approx(1 / 0.75, rel=0.02)


def test_example_beta_and_probabilities(three_level):
    U, q = 0.3, 0.5
    s = solve(three_level, U, q)
    o = brute_force(three_level, U, q, s.k_s)
    assert s.beta == pytest.approx(implied_beta(o.p, three_level.energies, U, q), rel=1e-6)
    assert np.max(np.abs(s.p - o.p)) < 1e-6
    assert s.beta == pytest.approx(1.3678676916, rel=1e-9)
    assert s.p == pytest.approx([0.5625078313, 0.2749843374, 0.1625078313], abs=1e-9)


def test_uniform_at_zero_beta():
    sp = custom([(0, 2), (1, 1), (2, 2)])
    s = distribution(sp, 1.0, 0.4, beta=0.0)
    assert np.allclose(s.p, 1 / sp.W, rtol=1e-15)
    assert math.isinf(s.T) and s.lambda2 == 0.0


def test_bg_oscillator_probabilities():
    U = 1.5
    b = oscillator_bg_beta(U)
    s = distribution(oscillator(2000, 1.0), U, 1.0, beta=b)
    n = np.arange(1, 21)
    assert np.allclose(s.p[:20], oscillator_bg_probabilities(b, n), rtol=1e-12)
    assert solve_beta(oscillator(2000, 1.0), U, 1.0) == pytest.approx(b, rel=1e-12)


def test_high_side_negative_beta():
    sp = oscillator(11, 1.0)
    U = 8.0
    assert beta_positivity_margin(sp, U) < 0
    s = solve(sp, U, 0.6)
    assert s.beta < 0 and s.T < 0
    assert np.all(np.diff(s.p) > 0)
    assert float(sp.degeneracies @ (s.p * sp.energies)) == pytest.approx(U, rel=1e-12)


def test_ratios_match_distribution(three_level):
    U, q = 0.3, 0.5
    s = solve(three_level, U, q)
    r = ratios(s, three_level, U, q)
    assert r[0] == 1.0
    assert r[1:] == pytest.approx(s.p[1:] / s.p[0], rel=1e-13)
    s0 = distribution(three_level, 0.5, q, beta=0.0)
    assert np.all(ratios(s0, three_level, 0.5, q) == 1.0)


def test_multipliers_examples(three_level):
    s = distribution(three_level, 0.5, 0.3, beta=0.0)
    assert multipliers(s, 1.0, 0.3)[1] == 0.0
    sp = oscillator(50, 1.0)
    s1 = solve(sp, 2.0, 1.0, k=2.0)
    s2 = solve(sp, 2.0, 1 - 1e-7, k=2.0)
    assert s1.lambda2 == pytest.approx(2.0 * s1.beta, rel=1e-14)
    assert s2.lambda2 == pytest.approx(s1.lambda2, rel=1e-5)


def test_lambda2_is_derivative_of_value_function(three_level):
    q, U, h = 0.5, 0.3, 1e-5
    k_s = scale_factor(EntropicParams(q), three_level.e_max, three_level.W)
    (_, Sm), (_, Sp) = value_curve(three_level, q, k_s, [U - h, U + h])
    s = solve(three_level, U, q)
    assert (Sp - Sm) / (2 * h) == pytest.approx(s.lambda2, rel=1e-4)


def test_temperature_examples():
    sp = oscillator(5, 1.0)
    s = solve(sp, 1.0, 1.0)
    assert temperature(s, 1.0, 1.0) == pytest.approx(1 / s.beta)
    from dataclasses import replace
    assert temperature(replace(s, beta=2.0), 1.0, 1.0) == 0.5
    with pytest.raises(InfiniteTemperature):
        temperature(replace(s, beta=0.0), 1.0, 1.0)


def test_uniform_classical_temperature():
    s = solve(uniform_grid(6001, 30.0, 1), 1.0, 1.0)
    assert s.T == pytest.approx(1.0, rel=0.02)


def test_hydrogen_temperature_converges():
    U, q = 0.5, 0.5
    Ts = [solve(hydrogen(N, 1.0), U, q).T for N in (500, 5000, 50000)]
    errs = [abs(T - U) for T in Ts]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_entropy_matches_direct_evaluation():
    sp = custom([(0, 1), (0.3, 2), (1.1, 3), (2.0, 1)])
    for q in (0.3, 0.8, 1.0):
        s = solve(sp, 0.7, q, k=1.3)
        S = entropy_value(s.p, EntropicParams(q, 1.3), s.k_s, degeneracy=sp.degeneracies)
        assert s.S == pytest.approx(S, rel=1e-12)


def test_domain_errors(three_level):
    for U in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(DomainError):
            solve(three_level, U, 0.5)
    for q in (0.0, 1.2):
        with pytest.raises(DomainError):
            solve(three_level, 0.5, q)


# -- invariants ------------------------------------------------------------

spectra = st.sampled_from([
    uniform_grid(41, 5.0, 2), oscillator(300, 0.5), box(60, 0.3), hydrogen(200, 13.6),
    custom([(0, 1), (0.1, 5), (0.4, 2), (3.0, 1)]),
])


@given(sp=spectra, frac=st.floats(1e-3, 0.999), q=st.floats(0.02, 1.0))
def test_constraints_hold(sp, frac, q):
    U = frac * sp.e_max
    s = solve(sp, U, q)
    g, e = sp.degeneracies, sp.energies
    assert math.fsum((g * s.p).tolist()) == pytest.approx(1.0, abs=1e-10)
    assert abs(math.fsum((g * s.p * e).tolist()) - U) <= 1e-9 * sp.e_max
    m = beta_positivity_margin(sp, U)
    if m != 0:
        assert np.sign(s.beta) == np.sign(m)


@given(sp=spectra, frac=st.floats(1e-3, 0.999), q=st.floats(0.02, 1.0),
       k=st.floats(0.01, 100), sigma=st.floats(0.2, 3))
def test_scale_factor_does_not_move_beta_or_p(sp, frac, q, k, sigma):
    U = frac * sp.e_max
    a = solve(sp, U, q)
    b = solve(sp, U, q, k=k, sigma=sigma)
    assert a.beta == b.beta
    assert np.array_equal(a.p, b.p)


@pytest.mark.parametrize("sp,U", [(oscillator(40, 1.0), 3.0), (hydrogen(60, 1.0), 0.4),
                                  (custom([(0, 1), (0.5, 1), (1, 1)]), 0.3)])
def test_continuity_at_q_one(sp, U):
    a = solve(sp, U, 1 - 1e-4).p
    b = solve(sp, U, 1.0).p
    assert np.max(np.abs(a - b)) < 1e-3


@pytest.mark.parametrize("make,U,q", [(oscillator, 1.5, 0.4), (oscillator, 1.5, 0.8),
                                      (box, 2.0, 0.3), (hydrogen, 0.5, 0.5)])
def test_beta_increases_with_truncation(make, U, q):
    Ns = [8, 16, 32, 64, 128, 256, 512, 1024]
    betas = [solve_beta(make(N, 1.0), U, q) for N in Ns if beta_positivity_margin(make(N, 1.0), U) > 0]
    assert len(betas) >= 5
    assert all(b2 > b1 for b1, b2 in zip(betas, betas[1:]))


@given(U=st.floats(0.02, 0.98), q=st.floats(0.1, 1.0))
def test_envelope_property(U, q):
    sp = custom([(0.0, 1), (0.5, 1), (1.0, 1)])
    h = 1e-5
    s = solve(sp, U, q)
    fd = (solve(sp, U + h, q).S - solve(sp, U - h, q).S) / (2 * h)
    assert fd == pytest.approx(s.lambda2, rel=1e-4, abs=1e-6)


# -- numerically delicate corners ---------------------------------------------

@pytest.mark.parametrize("sp,U,q", [
    (hydrogen(3, 18.484512457833194), 0.00785957335782195, 0.9806413722688788),
    (box(192, 3.4445276487232985), 126957.19863678887, 0.9986416278838528),
    (oscillator(3, 3.9217027421153308), 7.8413829649312845, 0.9876580290676872),
])
def test_root_far_from_endpoint_with_large_interval(sp, U, q):
    # |beta| is tiny compared with the admissible interval: solved in beta itself
    s = solve(sp, U, q)
    g, e = sp.degeneracies, sp.energies
    assert abs(math.fsum((g * s.p * e).tolist()) - U) <= 1e-9 * sp.e_max
    lo, hi = admissible_interval(sp, U, q)
    assert abs(s.beta) < 1e-3 * max(-lo, hi)


def test_endpoint_regime_delta_is_resolved():
    s = solve(hydrogen(10**6, 1.0), 0.5, 0.3)
    L = 1 / (0.7 * 0.5)
    assert 0 < s.delta < 1e-10 * L
    assert s.delta == pytest.approx(L - s.beta, abs=1e-15 * L)


def test_accelerated_sums_match_exact_streaming():
    sp = hydrogen(3 * 2**20 + 7, 1.0)
    for q in (0.4, 0.9):
        a = solve(sp, 0.5, q)
        b = solve(sp, 0.5, q, exact=True)
        assert a.beta == pytest.approx(b.beta, rel=1e-12)
        assert a.delta == pytest.approx(b.delta, rel=1e-9)
        assert a.p1 == pytest.approx(b.p1, rel=1e-9)
        assert a.p is None and b.p is None


def test_huge_uniform_grid_accelerated_vs_exact():
    sp = uniform_grid(2**21 + 3, 50.0, 2)
    a, b = solve(sp, 1.0, 0.7), solve(sp, 1.0, 0.7, exact=True)
    assert a.beta == pytest.approx(b.beta, rel=1e-12)
    assert a.S == pytest.approx(b.S, rel=1e-12)


def test_concurrent_solves_match_serial():
    cases = [(hydrogen(N, 1.0), 0.5, q) for N in (100, 1000, 10**7) for q in (0.3, 0.7)]
    serial = [solve(*c).beta for c in cases]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda c: solve(*c).beta, cases))
    assert serial == parallel
