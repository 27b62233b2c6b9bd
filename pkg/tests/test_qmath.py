import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmaxent.errors import DomainError
from qmaxent.qmath import (EntropicParams, entropy_value, log_scale_factor, q_exp, q_log,
                           scale_factor, signed_power)

qs = st.floats(0.01, 0.99)


def test_q_log_examples():
    assert q_log(1.0, 0.5) == 0.0
    assert q_log(2.0, 0.5) == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-15)
    assert q_log(math.e, 0.999999) == pytest.approx(1.0, abs=1e-5)


def test_q_log_at_zero_and_domain():
    assert q_log(0.0, 0.5) == -2.0
    with pytest.raises(DomainError):
        q_log(-1.0, 0.5)
    with pytest.raises(DomainError):
        q_log(2.0, 1.0)


def test_q_exp_examples():
    assert q_exp(0.0, 0.3) == 1.0
    # exp_{2-q} with q = 0.5: base 1 + (1 - 1.5)(-3) = 2.5, exponent 1/(1-1.5) = -2
    assert q_exp(-3.0, 1.5) == pytest.approx(2.5 ** -2, rel=1e-15)
    # the base reaching zero clips to zero for q < 1
    assert q_exp(-1.0 / 0.7, 0.3) == 0.0
    assert q_exp(-10.0, 0.3) == 0.0


def test_q_exp_vectorized_matches_scalar():
    z = np.linspace(-3, 3, 13)
    out = q_exp(z, 0.6)
    assert out.shape == z.shape
    assert np.allclose(out, [q_exp(float(v), 0.6) for v in z], rtol=0, atol=0)


@given(z=st.floats(1e-3, 1e3), q=qs)
def test_q_exp_inverts_q_log(z, q):
    assert q_exp(q_log(z, q), q) == pytest.approx(z, rel=1e-12)


def test_q_deformations_converge_to_classical():
    z = np.linspace(0.1, 10, 1001)
    q = 1 - 1e-6
    assert np.max(np.abs(q_log(z, q) - np.log(z))) < 1e-4
    assert np.max(np.abs(q_exp(np.log(z), q) - z)) < 1e-4


def test_signed_power():
    assert signed_power(-4.0, 0.5) == -2.0
    assert signed_power(0.0, 0.3) == 0.0
    assert signed_power(9.0, 0.5) == 3.0


@given(z=st.floats(-1e6, 1e6), q=qs)
def test_signed_power_is_odd(z, q):
    assert signed_power(-z, q) == -signed_power(z, q)


def test_scale_factor_examples():
    assert scale_factor(EntropicParams(1.0, k=1.380649e-23), 7.0, 11) == 1.380649e-23
    for q in (0.2, 0.5, 0.9):
        assert scale_factor(EntropicParams(q), 1.0, 3) == pytest.approx(2.0 ** (q - 1), rel=1e-15)
    # oscillator, sigma = 1: e_max = (N-1) hw, W = N
    hw, N, q, k = 0.7, 50, 0.4, 2.5
    assert scale_factor(EntropicParams(q, k), (N - 1) * hw, N) == pytest.approx(
        k ** q * hw ** (1 - q), rel=1e-14)


def test_scale_factor_continuous_at_one():
    e_max, W = 12.0, 40
    a = scale_factor(EntropicParams(1 - 1e-8, k=3.0), e_max, W)
    assert a == pytest.approx(3.0, rel=1e-6)
    assert math.exp(log_scale_factor(EntropicParams(0.3, 2.0, 1.5), e_max, W)) == \
        pytest.approx(scale_factor(EntropicParams(0.3, 2.0, 1.5), e_max, W), rel=1e-14)


@given(q=qs)
def test_scale_factor_positive(q):
    assert scale_factor(EntropicParams(q, 2.0, 1.3), 5.0, 7) > 0


def test_params_validation():
    with pytest.raises(DomainError):
        EntropicParams(0.0)
    with pytest.raises(DomainError):
        EntropicParams(1.5)
    with pytest.raises(DomainError):
        EntropicParams(0.5, k=-1)
    assert EntropicParams(1.0).classical


def test_entropy_examples():
    for q in (0.3, 1.0):
        p = np.zeros(6)
        p[0] = 1
        assert entropy_value(p, EntropicParams(q), k_s=1.0) == 0.0
    W, q, k_s = 8, 0.35, 1.7
    S = entropy_value(np.full(W, 1 / W), EntropicParams(q), k_s=k_s)
    assert S == pytest.approx(k_s * q_log(W, q), rel=1e-14)
    # Boltzmann-Gibbs with 0 log 0 = 0
    assert entropy_value([0.5, 0.5, 0.0], EntropicParams(1.0), k_s=1.0) == \
        pytest.approx(math.log(2), rel=1e-15)


def test_entropy_with_degeneracy_matches_expanded():
    p_level = np.array([0.2, 0.05, 0.15])
    g = np.array([1, 4, 4])
    expanded = np.repeat(p_level, g)
    params = EntropicParams(0.6)
    assert entropy_value(p_level, params, 1.0, degeneracy=g) == pytest.approx(
        entropy_value(expanded, params, 1.0), rel=1e-14)


@given(seed=st.integers(0, 2**32 - 1), q=st.floats(0.05, 1.0), lam=st.floats(0, 1))
def test_entropy_concave(seed, q, lam):
    rng = np.random.default_rng(seed)
    p, r = rng.dirichlet(np.ones(7)), rng.dirichlet(np.ones(7) * 0.3)
    params = EntropicParams(q)
    mix = entropy_value(lam * p + (1 - lam) * r, params, 1.0)
    assert mix >= lam * entropy_value(p, params, 1.0) + (1 - lam) * entropy_value(r, params, 1.0) - 1e-12
