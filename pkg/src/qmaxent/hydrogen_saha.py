"""Closed-form hydrogen temperatures and the Saha ionization cross-check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, DomainError

# CODATA 2018 (SI), with eV conversions
M_E = 9.1093837015e-31        # kg
H = 6.62607015e-34            # J s
K_B = 1.380649e-23            # J/K
EV = 1.602176634e-19          # J
K_B_EV = 8.617333262e-5       # eV/K
E_ION_EV = 13.6

CONSTANTS = {"m_e": M_E, "h": H, "k": K_B, "eV": EV, "k_eV": K_B_EV, "e_ion_eV": E_ION_EV}

T_BRACKET = (1e3, 1e7)

PRINTED, CONVENTIONAL = "printed", "conventional"


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q}")


def hydrogen_T(U: float, q: float, e_ion: float = E_ION_EV, k: float = K_B_EV) -> float:
    """Limiting hydrogen temperature
    ``((1-q)/q)**(1/q) (U/e_ion)**((1-q)/q) e_ion/k``; equals U/k at q = 1/2."""
    _check_q(q)
    if not 0.0 < U <= e_ion:
        raise DomainError("need 0 < U <= e_ion")
    return t_ion(q, e_ion, k) * (U / e_ion) ** ((1.0 - q) / q)


def t_ion(q: float, e_ion: float = E_ION_EV, k: float = K_B_EV) -> float:
    """Critical ionization temperature ``((1-q)/q)**(1/q) e_ion/k``."""
    _check_q(q)
    return math.exp(math.log((1.0 - q) / q) / q) * e_ion / k


@dataclass(frozen=True)
class SahaConditions:
    eta: float
    x: float = 0.999
    m_e: float = M_E
    h: float = H
    k: float = K_B
    e_ion_eV: float = E_ION_EV
    convention: str = PRINTED

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("eta must be positive")
        if not 0.0 < self.x < 1.0:
            raise DomainError("x must lie in (0, 1)")
        if self.convention not in (PRINTED, CONVENTIONAL):
            raise DomainError(f"unknown sign convention {self.convention!r}")

    @property
    def sign(self) -> float:
        # printed form carries exp(+e_ion/kT); the textbook form exp(-e_ion/kT)
        return 1.0 if self.convention == PRINTED else -1.0


def saha_log_A(T: float, c: SahaConditions) -> float:
    """``log A`` with ``A = (2 pi m_e k T/h**2)**1.5 exp(+-e_ion/kT)/eta``."""
    if not T > 0:
        raise DomainError("T must be positive")
    thermal = 1.5 * math.log(2.0 * math.pi * c.m_e * c.k * T / (c.h * c.h))
    return thermal + c.sign * c.e_ion_eV * EV / (c.k * T) - math.log(c.eta)


def fraction_from_A(A: float) -> float:
    """Positive root of ``x**2/(1-x) = A``, written without cancellation."""
    if A < 0:
        raise DomainError("A must be non-negative")
    if A == 0:
        return 0.0
    if math.isinf(A):
        return 1.0
    # (-A + sqrt(A**2 + 4A))/2 == 2/(1 + sqrt(1 + 4/A))
    return 2.0 / (1.0 + math.sqrt(1.0 + 4.0 / A))


def saha_ionized_fraction(T: float, conditions: SahaConditions) -> float:
    log_A = saha_log_A(T, conditions)
    A = math.inf if log_A > 709 else math.exp(log_A)
    return fraction_from_A(A)


def _root_in_bracket(conditions, x_target, bracket, grid=400):
    target = math.log(x_target * x_target / (1.0 - x_target))
    lt = np.linspace(math.log(bracket[0]), math.log(bracket[1]), grid)
    f = np.array([saha_log_A(math.exp(v), conditions) for v in lt]) - target
    # scan for sign changes so the bracketing adapts to the shape of A(T)
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0)[0]
    if len(idx) == 0:
        raise BracketError(
            f"x={x_target} not reached for T in {bracket} under the {conditions.convention} "
            f"sign (log A - target spans [{f.min():.3g}, {f.max():.3g}])")
    i = int(idx[0])
    return math.exp(brentq(lambda v: saha_log_A(math.exp(v), conditions) - target,
                           lt[i], lt[i + 1], xtol=1e-14, rtol=1e-15))


def saha_t_ion(eta: float, x_target: float = 0.999, convention: str = "auto",
               bracket=T_BRACKET) -> tuple[float, str]:
    """Temperature at which the ionized fraction reaches ``x_target``.

    ``convention='auto'`` tries the printed exponential sign first and
    falls back to the conventional one when it has no root in ``bracket``.
    Returns ``(T, convention_used)``.
    """
    order = [PRINTED, CONVENTIONAL] if convention == "auto" else [convention]
    last = None
    for conv in order:
        c = SahaConditions(eta, x_target, convention=conv)
        try:
            return _root_in_bracket(c, x_target, bracket), conv
        except BracketError as exc:
            last = exc
    raise last


def A_minimum(eta: float, convention: str = PRINTED) -> tuple[float, float]:
    """``(T, A)`` at the minimum of ``A(T)``; it exists only for the printed sign,
    at ``T = 2 e_ion/(3 k)``."""
    if convention != PRINTED:
        raise DomainError("A(T) is monotone under the conventional sign")
    c = SahaConditions(eta, convention=PRINTED)
    T = 2.0 * c.e_ion_eV * EV / (3.0 * c.k)
    return T, math.exp(saha_log_A(T, c))


def saha_table(eta_min: float = 1e13, eta_max: float = 1e27, points: int = 15,
               x_target: float = 0.999, convention: str = "auto") -> tuple[list[tuple[float, float]], str]:
    """``(eta, T)`` over a log-spaced eta grid and the convention that produced it.

    One convention is used for the whole table: in auto mode the printed
    sign is kept only if it has a root at every eta.
    """
    etas = np.logspace(math.log10(eta_min), math.log10(eta_max), points)
    order = [PRINTED, CONVENTIONAL] if convention == "auto" else [convention]
    last = None
    for conv in order:
        try:
            rows = [(float(e), saha_t_ion(float(e), x_target, conv)[0]) for e in etas]
            return rows, conv
        except BracketError as exc:
            last = exc
    raise last
