"""Brute-force maximizer for spectra with at most four distinct levels.

Works on level masses ``m_n = g_n p_n``.  The two constraints eliminate
two masses, leaving a concave objective in one (three levels) or two
(four levels) free masses, maximized by bounded scalar search, polished
on the analytic derivative and guarded by a grid scan.  The objective is
evaluated from first principles with plain powers; nothing is shared
with the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, InfeasibleError
from .qmath import EntropicParams, scale_factor
from .spectra import Spectrum

GRID_STEP_3 = 1e-4
GRID_STEP_4 = 1e-2


@dataclass(frozen=True)
class OracleResult:
    p: np.ndarray        # microstate probability per level
    S: float
    U_check: float
    mass: np.ndarray     # level masses g_n p_n


def _objective(m, g, q, k_s):
    """Entropy of level masses ``m`` (any trailing shape), 0 ln 0 = 0."""
    m = np.clip(m, 0.0, None)
    if q == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(m > 0, -m * np.log(m / g), 0.0)
        return k_s * t.sum(axis=0)
    return k_s * ((g ** (1.0 - q) * m ** q).sum(axis=0) - 1.0) / (1.0 - q)


def _dobjective(m, g, q, k_s):
    """Partial derivatives of the objective with respect to each mass."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if q == 1.0:
            return -k_s * (np.log(m / g) + 1.0)
        return k_s * q / (1.0 - q) * g ** (1.0 - q) * m ** (q - 1.0)


def _maximize_1d(f, df, a, b, grid_step):
    """Maximize concave ``f`` on ``[a, b]``; ``df`` its derivative."""
    if b - a <= 0:
        return a
    with np.errstate(invalid="ignore"):
        # the derivative is infinite where a mass vanishes; inf * 0 is harmless
        return _maximize_1d_inner(f, df, a, b, grid_step)


def _maximize_1d_inner(f, df, a, b, grid_step):
    res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, b - a)})
    x = float(res.x)
    # polish on the derivative where it changes sign around the estimate
    width = max(1e-6 * (b - a), 1e-12)
    lo, hi = max(a, x - width), min(b, x + width)
    try:
        if lo < hi and df(lo) > 0 > df(hi):
            x = brentq(df, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    except (ValueError, ZeroDivisionError, FloatingPointError):
        pass
    # guard against a boundary optimum the local search missed
    n = max(2, int(math.ceil((b - a) / grid_step)) + 1)
    xs = np.linspace(a, b, n)
    fs = np.array([f(v) for v in xs]) if n < 64 else f(xs)
    j = int(np.argmax(fs))
    if fs[j] > f(x):
        x = float(xs[j])
    return x


def _check(spectrum, U):
    if spectrum.N > 4:
        raise DomainError("the brute-force oracle handles at most 4 levels")
    if not 0.0 < U < spectrum.e_max:
        raise InfeasibleError(f"U={U!r} outside (0, e_max={spectrum.e_max!r})")


def _levels(spectrum):
    e = np.array([float(v) for v in spectrum.energies])
    g = np.array([float(v) for v in spectrum.degeneracies])
    return e, g


def _masses3(m1, e, U):
    m1 = np.asarray(m1, dtype=float)
    m3 = (U - (1.0 - m1) * e[1]) / (e[2] - e[1])
    m2 = (1.0 - m1) - m3
    return np.stack([m1, m2, m3])


def _solve3(e, g, U, q, k_s):
    # m3 >= 0 needs m1 >= 1 - U/e2; m2 >= 0 needs m1 <= 1 - U/e3
    a = max(0.0, 1.0 - U / e[1])
    b = 1.0 - U / e[2]
    dm = np.array([1.0, -1.0 - e[1] / (e[2] - e[1]), e[1] / (e[2] - e[1])])

    def f(m1):
        return _objective(_masses3(m1, e, U), g[:, None] if np.ndim(m1) else g, q, k_s)

    def df(m1):
        return float(_dobjective(_masses3(m1, e, U), g, q, k_s) @ dm)

    m1 = _maximize_1d(f, df, a, b, GRID_STEP_3)
    return _masses3(m1, e, U)


def _masses4(m1, m2, e, U):
    s = 1.0 - m1 - m2
    t = U - m2 * e[1]
    m4 = (t - s * e[2]) / (e[3] - e[2])
    m3 = s - m4
    return np.array([m1, m2, m3, m4])


def _m2_interval(m1, e, U):
    """Feasible m2 for given m1 from m2, m3, m4 >= 0."""
    s0 = 1.0 - m1
    # m4 >= 0: U - m2 e2 - (s0 - m2) e3 >= 0  ->  m2 (e3 - e2) >= s0 e3 - U
    lo = max(0.0, (s0 * e[2] - U) / (e[2] - e[1]))
    # m3 >= 0: s0 - m2 >= m4  ->  U - m2 e2 <= (s0 - m2) e4
    hi = min(s0, (s0 * e[3] - U) / (e[3] - e[1]))
    return lo, hi


def _solve4(e, g, U, q, k_s):
    c3 = (e[3] - e[1]) / (e[3] - e[2])
    c4 = (e[2] - e[1]) / (e[3] - e[2])
    # d(m3, m4)/d m2 at fixed m1 and d(m3, m4)/d m1 at fixed m2
    dm_2 = np.array([0.0, 1.0, -c3, c4])
    dm_1 = np.array([1.0, 0.0, -1.0 - e[2] / (e[3] - e[2]), e[2] / (e[3] - e[2])])

    def inner(m1):
        lo, hi = _m2_interval(m1, e, U)

        def f(m2):
            if np.ndim(m2):
                return np.array([_objective(_masses4(m1, v, e, U), g, q, k_s) for v in m2])
            return _objective(_masses4(m1, m2, e, U), g, q, k_s)

        def df(m2):
            return float(_dobjective(_masses4(m1, m2, e, U), g, q, k_s) @ dm_2)

        return _maximize_1d(f, df, lo, hi, GRID_STEP_4)

    # m1 range: feasible set of the remaining three-level problem is nonempty
    a = max(0.0, 1.0 - U / e[1])
    b = 1.0 - U / e[3]

    def F(m1):
        if np.ndim(m1):
            return np.array([F(v) for v in m1])
        m2 = inner(m1)
        return _objective(_masses4(m1, m2, e, U), g, q, k_s)

    def dF(m1):
        # envelope: the inner optimum makes the m2 derivative vanish
        m2 = inner(m1)
        return float(_dobjective(_masses4(m1, m2, e, U), g, q, k_s) @ dm_1)

    m1 = _maximize_1d(F, dF, a, b, GRID_STEP_4)
    return _masses4(m1, inner(m1), e, U)


def brute_force(spectrum: Spectrum, U: float, q: float, k_s: float | None = None) -> OracleResult:
    """Maximize the entropy over the constrained simplex by direct search."""
    _check(spectrum, U)
    if k_s is None:
        k_s = scale_factor(EntropicParams(q), spectrum.e_max, spectrum.W)
    e, g = _levels(spectrum)
    if spectrum.N == 2:
        m = np.array([1.0 - U / e[1], U / e[1]])
    elif spectrum.N == 3:
        m = _solve3(e, g, U, q, k_s)
    else:
        m = _solve4(e, g, U, q, k_s)
    m = np.clip(np.asarray(m, dtype=float), 0.0, None)
    return OracleResult(p=m / g, S=float(_objective(m, g, q, k_s)),
                        U_check=float(m @ e), mass=m)


def boundary_value(spectrum: Spectrum, U: float, q: float, k_s: float) -> float:
    """Entropy at ``U = 0`` or ``U = e_max``: all mass on one level."""
    e, g = _levels(spectrum)
    j = 0 if U <= 0.0 else len(e) - 1
    m = np.zeros_like(e)
    m[j] = 1.0
    return float(_objective(m, g, q, k_s))


def value_curve(spectrum: Spectrum, q: float, k_s: float | None, U_grid) -> list[tuple[float, float]]:
    """Maximized entropy ``S(U)`` over a grid; endpoints use the degenerate value."""
    if k_s is None:
        k_s = scale_factor(EntropicParams(q), spectrum.e_max, spectrum.W)
    out = []
    for U in U_grid:
        U = float(U)
        if U <= 0.0 or U >= spectrum.e_max:
            if U < 0.0 or U > spectrum.e_max:
                raise InfeasibleError(f"U={U!r} outside [0, e_max]")
            out.append((U, boundary_value(spectrum, U, q, k_s)))
        else:
            out.append((U, brute_force(spectrum, U, q, k_s).S))
    return out
