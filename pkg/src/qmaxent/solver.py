"""Structural parameter, optimal distribution, multipliers and temperature
for one truncated entropy-maximization problem.

Weights are never formed directly as ``(1 + (1-q) beta E)**(1/(q-1))``:
near the singular endpoint of the admissible interval that base is a
difference of nearly equal numbers.  Instead every weight is written
relative to an anchor level,

    w_n = w_ref * (1 + kappa d_n)**(1/(q-1))

with ``d_n`` the (exactly computed) distance of level n from the ground
level when ``beta >= 0`` and from the top level when ``beta < 0``.  Near
the endpoint the unknown is the gap (``delta`` or ``eps``); away from it,
``|beta|`` itself.  Either way ``kappa`` and ``w_ref`` are formed without
cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError, InfiniteTemperature
from .levelsum import HIGH, LOW, engine_for, relative_weight
from .qmath import EntropicParams, scale_factor
from .spectra import Spectrum, beta_positivity_margin

DEFAULT_TOL = 1e-12
MAX_ITER = 200
# fraction of the admissible interval beyond which the gap is solved in log space
ENDPOINT_SWITCH = 0.1
LOG_GAP_FLOOR = 1e-300
# below this fraction of the interval, beta itself is the better variable
ENDPOINT_SWITCH_BETA = 1.0 - ENDPOINT_SWITCH
_NOISE = 64 * np.finfo(float).eps
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class MaxEntSolution:
    """Solution of one truncated problem.

    ``p`` holds one microstate probability per distinct level (multiply by
    the degeneracy for the level mass); it is ``None`` for accelerated
    huge truncations, where only ``p1`` is reported.
    """

    beta: float
    delta: float | None
    p: np.ndarray | None
    p1: float
    Z: float
    log_Z: float
    sum_pq: float
    lambda1: float | None
    lambda2: float | None
    S: float | None
    T: float | None
    k_s: float | None
    q: float
    U: float
    side: int
    iterations: int = 0


class _Point(NamedTuple):
    beta: float
    gap: float | None     # distance to the singular endpoint (q < 1)
    kappa: float
    log_wref: float


class _Anchored:
    """Residual and sums on one side of beta = 0.

    A point is built either from the gap to the singular endpoint,

    q < 1, beta >= 0: x = delta = L - beta, L = 1/((1-q)U)
    q < 1, beta < 0:  x = eps = beta + M,  M = 1/((1-q)(e_max-U))

    or from ``b = |beta|``; the first keeps precision near the endpoint,
    the second near beta = 0.  At q = 1 only ``b`` is used.
    ``h`` is the residual with its sign arranged to increase in the gap.
    """

    def __init__(self, spectrum, U, q, side, exact=False):
        self.sp = spectrum
        self.U = U
        self.q = q
        self.side = side
        self.eng = engine_for(spectrum, exact)
        self.boltzmann = q == 1.0
        self.expo = 0.0 if self.boltzmann else 1.0 / (q - 1.0)
        # distance of U from the anchor level
        self.D = U if side == LOW else spectrum.e_max - U
        self.G = math.inf if self.boltzmann else 1.0 / ((1.0 - q) * self.D)
        # residual increases with the gap for q < 1 on the low side
        self.sign = 1.0 if (side == LOW) != self.boltzmann else -1.0

    def at_gap(self, x):
        b = self.G - x
        return _Point(self.side * b, x, b / (self.D * x),
                      self.expo * math.log((1.0 - self.q) * self.D * x))

    def at_beta(self, b):
        if self.boltzmann:
            return _Point(self.side * b, None, b, b * self.D)
        c = (1.0 - self.q) * self.D * b
        # 1 - c is the gap in units of G, formed without cancellation in b
        return _Point(self.side * b, self.G - b, (1.0 - self.q) * b / (1.0 - c),
                      self.expo * math.log1p(-c))

    def sums(self, pt, want_q=False):
        return self.eng.sums(self.side, self.U, pt.kappa, self.expo,
                             self.boltzmann, want_q, self.q)

    def h(self, x):
        """Signed residual against the gap; payload is ``(point, sums)``."""
        pt = self.at_gap(x)
        s = self.sums(pt)
        return self.sign * s[1], (pt, s)

    def h_beta(self, b):
        """Signed residual increasing in ``b = |beta|``."""
        pt = self.at_beta(b)
        s = self.sums(pt)
        sign = -self.sign if not self.boltzmann else self.sign
        return sign * s[1], (pt, s)

    def point(self, beta):
        """Best-conditioned point for a given beta."""
        b = abs(beta)
        if self.boltzmann or b <= ENDPOINT_SWITCH_BETA * self.G:
            return self.at_beta(b)
        return self.at_gap(self.G - b)


def _side(spectrum, U):
    m = beta_positivity_margin(spectrum, U)
    return 0 if m == 0 else (LOW if m > 0 else HIGH)


def _check(spectrum, U, q):
    if not 0.0 < q <= 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    if not 0.0 < U < spectrum.e_max:
        raise DomainError(f"U={U!r} outside (0, e_max={spectrum.e_max!r})")


def admissible_interval(spectrum: Spectrum, U: float, q: float) -> tuple[float, float]:
    """Open interval of beta on which every weight is finite and positive."""
    _check(spectrum, U, q)
    if q == 1.0:
        return (-math.inf, math.inf)
    return (-1.0 / ((1.0 - q) * (spectrum.e_max - U)), 1.0 / ((1.0 - q) * U))


def residual(spectrum: Spectrum, U: float, q: float, beta: float,
             normalized: bool = False) -> float:
    """``sum_n g_n w_n (e_n - U)``: strictly decreasing in beta, zero at the root.

    With ``normalized`` the value is divided by ``sum_n g_n w_n |e_n - U|``,
    which keeps it in ``[-1, 1]`` and avoids overflow.
    """
    lo, hi = admissible_interval(spectrum, U, q)
    if not lo < beta < hi:
        raise DomainError(f"beta={beta!r} outside the admissible interval ({lo}, {hi})")
    side = LOW if beta >= 0 else HIGH
    prob = _Anchored(spectrum, U, q, side)
    pt = prob.point(beta)
    _, R, A, _ = prob.sums(pt)
    if normalized:
        return R / A
    with np.errstate(over="ignore"):
        return float(R * np.exp(pt.log_wref))


def _find_root(h, x_lo, x_hi, h_lo, h_hi, log_space, done, maxiter):
    """Safeguarded secant on an increasing function with ``h_lo < 0 < h_hi``.

    Returns ``(x, payload, iterations)``.  Secant steps falling outside the
    bracket, or failing to halve it over two steps, are replaced by
    bisection.  Iteration is in ``log x`` when ``log_space``.
    """
    to_y = math.log if log_space else (lambda v: v)
    to_x = math.exp if log_space else (lambda v: v)
    ylo, yhi = to_y(x_lo), to_y(x_hi)
    flo, plo = h_lo
    fhi, phi = h_hi
    prev, cur = (ylo, flo), (yhi, fhi)
    ref_width = yhi - ylo
    force_bisect = False
    it = 0
    while not done(to_x(ylo), to_x(yhi), ylo, yhi):
        if it >= maxiter:
            raise ConvergenceError(f"no convergence after {maxiter} iterations")
        it += 1
        y = None
        if not force_bisect and cur[1] != prev[1]:
            y = cur[0] - cur[1] * (cur[0] - prev[0]) / (cur[1] - prev[1])
            if not ylo < y < yhi:
                y = None
        if y is None:
            y = 0.5 * (ylo + yhi)
            force_bisect = False
        x = to_x(y)
        fy, payload = h(x)
        # exact zero or a value lost in rounding noise of the sum
        if fy == 0.0 or abs(fy) <= _NOISE * payload[1][2]:
            return x, payload, it
        if fy < 0:
            ylo, flo, plo = y, fy, payload
        else:
            yhi, fhi, phi = y, fy, payload
        prev, cur = cur, (y, fy)
        if it % 2 == 0:
            if yhi - ylo > 0.5 * ref_width:
                force_bisect = True
            ref_width = yhi - ylo
    # report the bracket end with the smaller residual
    if abs(flo) <= abs(fhi):
        return to_x(ylo), plo, it
    return to_x(yhi), phi, it


def solve_beta(spectrum: Spectrum, U: float, q: float, tol: float = DEFAULT_TOL,
               maxiter: int = MAX_ITER, exact: bool = False) -> float:
    """Structural parameter of the truncated problem."""
    return _solve(spectrum, U, q, tol, maxiter, exact)[0].beta


def _solve(spectrum, U, q, tol, maxiter, exact):
    """Return ``(point, anchored problem, sums, iterations)``."""
    _check(spectrum, U, q)
    if not tol > 0:
        raise DomainError("tol must be positive")
    side = _side(spectrum, U)
    if side == 0:
        prob = _Anchored(spectrum, U, q, LOW, exact)
        pt = prob.at_beta(0.0)
        return pt, prob, prob.sums(pt, want_q=True), 0
    prob = _Anchored(spectrum, U, q, side, exact)
    scale = 1.0 / spectrum.e_max

    def done_b(xl, xh, yl, yh):
        return xh - xl <= tol * (xh + scale)

    if q == 1.0:
        h = prob.h_beta
        # h increases in |beta|; double until the sign changes
        lo, f_lo = 0.0, h(0.0)
        hi = scale
        f_hi = h(hi)
        while f_hi[0] < 0:
            lo, f_lo = hi, f_hi
            hi *= 2.0
            if hi > 1e300:
                raise BracketError("no sign change for |beta| up to 1e300")
            f_hi = h(hi)
        b, (pt, s), it = _find_root(h, lo, hi, f_lo, f_hi, False, done_b, maxiter)
    else:
        G = prob.G
        x_switch = ENDPOINT_SWITCH * G
        f_switch = prob.h(x_switch)
        if f_switch[0] > 0:
            # root in (0, x_switch): close to the singular endpoint
            lo = G * LOG_GAP_FLOOR
            f_lo = prob.h(lo)
            if f_lo[0] >= 0:
                raise BracketError("root lies closer to the endpoint than 1e-300 "
                                   "of the admissible interval")

            def done(xl, xh, yl, yh):
                return yh - yl <= tol

            x, (pt, s), it = _find_root(prob.h, lo, x_switch, f_lo, f_switch, True,
                                        done, maxiter)
        else:
            # root in |beta| < (1 - switch) G: iterate on |beta| itself
            b_switch = G - x_switch
            f_b = prob.h_beta(b_switch)
            b, (pt, s), it = _find_root(prob.h_beta, 0.0, b_switch, prob.h_beta(0.0),
                                        f_b, False, done_b, maxiter)
    return pt, prob, prob.sums(pt, want_q=True), it


def distribution(spectrum: Spectrum, U: float, q: float, beta: float | None = None,
                 params: EntropicParams | None = None, tol: float = DEFAULT_TOL,
                 exact: bool = False) -> MaxEntSolution:
    """Optimal distribution, multipliers, entropy and temperature.

    When ``beta`` is omitted it is solved for.  ``params`` (with the same
    ``q``) supplies ``k`` and ``sigma`` for the scale factor; the
    structural parameter and the probabilities never depend on it.
    """
    if beta is None:
        pt, prob, sums, it = _solve(spectrum, U, q, tol, MAX_ITER, exact)
    else:
        _check(spectrum, U, q)
        lo, hi = admissible_interval(spectrum, U, q)
        if not lo < beta < hi:
            raise DomainError(f"beta={beta!r} outside ({lo}, {hi})")
        side = LOW if beta >= 0 else HIGH
        prob = _Anchored(spectrum, U, q, side, exact)
        pt = prob.point(beta)
        sums = prob.sums(pt, want_q=True)
        it = 0
    beta = pt.beta
    Zt, Rt, At, Qt = sums
    log_Z = math.log(Zt) + pt.log_wref
    with np.errstate(over="ignore"):
        Z = float(np.exp(log_Z))
    kappa = pt.kappa
    d1 = prob.eng.anchor_distance_of_ground(prob.side)
    p1 = float(relative_weight(d1, kappa, prob.expo, prob.boltzmann)) / Zt
    p = None
    if prob.eng.materialized:
        p = prob.eng.weights(prob.side, kappa, prob.expo, prob.boltzmann) / Zt
    sum_pq = 1.0 if q == 1.0 else Qt / Zt ** q
    delta = None
    if q < 1.0:
        delta = pt.gap if prob.side == LOW else 1.0 / ((1.0 - q) * U) - beta
    sol = MaxEntSolution(beta=beta, delta=delta, p=p, p1=p1, Z=Z, log_Z=log_Z,
                         sum_pq=sum_pq, lambda1=None, lambda2=None, S=None, T=None,
                         k_s=None, q=q, U=U, side=prob.side, iterations=it)
    if params is None:
        params = EntropicParams(q, sigma=spectrum.default_sigma)
    if params.q != q:
        raise DomainError("params.q differs from q")
    return with_scale(sol, spectrum, params, mean_residual=Rt / Zt)


def with_scale(sol: MaxEntSolution, spectrum: Spectrum, params: EntropicParams,
               mean_residual: float = 0.0) -> MaxEntSolution:
    """Attach multipliers, entropy and temperature for the given scale factor."""
    k_s = scale_factor(params, spectrum.e_max, spectrum.W)
    lam1, lam2 = multipliers(sol, k_s, params.q)
    if params.q == 1.0:
        S = k_s * (sol.log_Z + sol.beta * mean_residual)
    else:
        # sum g w**q = Z + (1-q) beta R, so sum p**q - 1 needs no subtraction
        # of nearly equal numbers even as q -> 1
        a = (1.0 - params.q) * sol.log_Z
        S = k_s * (math.expm1(a) / (1.0 - params.q) + math.exp(a) * sol.beta * mean_residual)
    try:
        T = temperature(sol, k_s, params.q)
    except InfiniteTemperature:
        T = math.inf
    return MaxEntSolution(**{**sol.__dict__, "lambda1": lam1, "lambda2": lam2,
                             "S": S, "T": T, "k_s": k_s})


def ratios(solution: MaxEntSolution, spectrum: Spectrum, U: float, q: float) -> np.ndarray:
    """``r_n = p_n/p_1 = (U delta/(U delta + beta e_n))**(1/(1-q))``."""
    if q >= 1.0:
        raise DomainError("ratios are defined for q < 1")
    delta = solution.delta
    beta = solution.beta
    e = spectrum.energies
    with np.errstate(divide="ignore"):
        # 1 + (beta/(U delta)) e_n written as a log1p to keep precision
        return np.exp(-np.log1p(beta * e / (U * delta)) / (1.0 - q))


def multipliers(solution: MaxEntSolution, k_s: float, q: float) -> tuple[float, float]:
    """Lagrange multipliers ``(lambda1, lambda2)``.

    ``lambda2 = beta k_s q Z**(1-q)`` equals ``1/|T|**q`` with the sign of T.
    """
    if q == 1.0:
        return k_s * (solution.log_Z - 1.0), k_s * solution.beta
    lam1 = k_s * q * solution.sum_pq / (1.0 - q)
    if solution.beta == 0.0:
        return lam1, 0.0
    log_mag = math.log(abs(solution.beta)) + math.log(k_s * q) + (1.0 - q) * solution.log_Z
    return lam1, math.copysign(_exp_clamped(log_mag), solution.beta)


def temperature(solution: MaxEntSolution, k_s: float, q: float) -> float:
    """Signed temperature; raises :class:`InfiniteTemperature` when beta = 0."""
    beta = solution.beta
    if beta == 0.0:
        raise InfiniteTemperature("beta = 0 corresponds to infinite temperature")
    if q == 1.0:
        return 1.0 / (k_s * beta)
    log_T = -(math.log(q * abs(beta)) + math.log(k_s) + (1.0 - q) * solution.log_Z) / q
    # small q raises to a large power 1/q; beyond the double range report inf or 0
    return math.copysign(_exp_clamped(log_T), beta)


def _exp_clamped(x):
    return math.inf if x > _LOG_MAX else math.exp(x)


def solve(spectrum: Spectrum, U: float, q: float, k: float = 1.0,
          sigma: float | None = None, tol: float = DEFAULT_TOL,
          exact: bool = False) -> MaxEntSolution:
    """Solve the truncated problem end to end."""
    sigma = spectrum.default_sigma if sigma is None else sigma
    return distribution(spectrum, U, q, params=EntropicParams(q, k, sigma), tol=tol,
                        exact=exact)
