import math

import numpy as np
import pytest

from qmaxent.errors import BracketError, DomainError
from qmaxent.hydrogen_saha import (CONVENTIONAL, E_ION_EV, K_B_EV, PRINTED, SahaConditions,
                                   A_minimum, fraction_from_A, hydrogen_T, saha_ionized_fraction,
                                   saha_log_A, saha_t_ion, saha_table, t_ion)


def test_hydrogen_T_examples():
    assert hydrogen_T(1.0, 0.5, e_ion=1.0, k=1.0) == pytest.approx(1.0, rel=1e-15)
    assert hydrogen_T(E_ION_EV, 0.5) == pytest.approx(1.578e5, rel=1e-3)
    assert hydrogen_T(1e-12, 0.3, 1.0, 1.0) < 1e-20


@pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_hydrogen_T_increasing_and_factorizes(q):
    U = np.linspace(0.01, 1.0, 50)
    T = np.array([hydrogen_T(u, q, 1.0, 1.0) for u in U])
    assert np.all(np.diff(T) > 0)
    ident = t_ion(q, 1.0, 1.0) * U ** ((1 - q) / q)
    assert T == pytest.approx(ident, rel=1e-12)


def test_specific_heat_at_half_is_k():
    k, h = 2.3, 1e-6
    # U = k T at q = 1/2, so dU/dT = k; check by differentiating T(U)
    U = 0.4
    dTdU = (hydrogen_T(U + h, 0.5, 1.0, k) - hydrogen_T(U - h, 0.5, 1.0, k)) / (2 * h)
    assert 1 / dTdU == pytest.approx(k, rel=1e-8)


def test_t_ion_examples():
    assert t_ion(0.5) == pytest.approx(E_ION_EV / K_B_EV, rel=1e-15)
    assert t_ion(0.99) > t_ion(0.999)
    with pytest.raises(DomainError):
        t_ion(1.0)


def test_fraction_examples():
    assert fraction_from_A(1000.0) == pytest.approx(0.999, abs=1e-5)
    assert fraction_from_A(2.0) == pytest.approx(math.sqrt(3) - 1, rel=1e-15)
    assert fraction_from_A(0.0) == 0.0
    assert fraction_from_A(1e-30) == pytest.approx(1e-15, rel=1e-6)
    x = fraction_from_A(7.5)
    assert x * x / (1 - x) == pytest.approx(7.5, rel=1e-14)


def test_printed_sign_has_a_minimum():
    T, A = A_minimum(1e13)
    assert T == pytest.approx(2 * E_ION_EV / (3 * K_B_EV), rel=1e-9)
    c = SahaConditions(1e13, convention=PRINTED)
    assert saha_log_A(0.9 * T, c) > math.log(A) and saha_log_A(1.1 * T, c) > math.log(A)
    # at low density the minimum stays far above x = 0.999 (A = 998)
    assert A > 998


def test_printed_sign_unreachable_at_low_density():
    with pytest.raises(BracketError):
        saha_t_ion(1e13, convention=PRINTED)


@pytest.mark.parametrize("eta", [1e13, 1e18, 1e22, 1e27])
def test_round_trip_fraction(eta):
    T, conv = saha_t_ion(eta, 0.999, CONVENTIONAL)
    x = saha_ionized_fraction(T, SahaConditions(eta, 0.999, convention=conv))
    assert x == pytest.approx(0.999, abs=1e-9)


def test_table_range_and_convention():
    rows, conv = saha_table(1e13, 1e27, 15)
    assert conv == CONVENTIONAL
    T = [r[1] for r in rows]
    assert all(b > a for a, b in zip(T, T[1:]))
    assert T[0] == pytest.approx(6.2e3, rel=0.1)
    assert T[-1] == pytest.approx(6.5e5, rel=0.1)


def test_bad_conditions():
    for kw in ({"eta": -1.0}, {"eta": 1.0, "x": 1.0}, {"eta": 1.0, "convention": "x"}):
        with pytest.raises(DomainError):
            SahaConditions(**kw)
