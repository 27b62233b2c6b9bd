"""Truncation sweeps N -> infinity and the closed-form limits they approach.

A sweep solves the truncated problem on a schedule of N values and
records ``(N, beta, delta, T, p1, margin)`` per row.  Rates are fitted on
``log delta`` against ``log N``; limits are extrapolated with a
three-point power-law fit.  The remaining functions are closed forms and
independent numerical routes (infinite series, integrals) that the sweeps
are compared against.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DegenerateFitError, DomainError, QMaxEntError
from .qmath import q_exp
from .solver import DEFAULT_TOL, solve
from .spectra import Spectrum, beta_positivity_margin, uniform_grid

DEFAULT_N0 = 64
DEFAULT_N_MAX = {"uniform": 100_000, "oscillator": 100_000, "hydrogen": 100_000,
                 "box": 10_000, "custom": 100_000}


@dataclass(frozen=True)
class Row:
    N: int
    beta: float
    delta: float | None
    T: float | None
    p1: float
    margin: float
    g1p1: float
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class LimitSequence:
    family: dict
    U: float
    q: float
    rows: list[Row]
    fit: tuple[float, float] | None = None
    beta_limit: float | None = None
    T_limit: float | None = None
    beta_monotone: bool | None = None
    delta_monotone: bool | None = None
    meta: dict = field(default_factory=dict)

    @property
    def good_rows(self) -> list[Row]:
        return [r for r in self.rows if r.ok]

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.good_rows], dtype=float)

    @property
    def last(self) -> Row:
        return self.good_rows[-1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fit"] = None if self.fit is None else {"exponent": self.fit[0],
                                                  "prefactor": self.fit[1]}
        return d


# -- schedules -----------------------------------------------------------

def geometric_schedule(N0: int, N_max: int, factor: float = 2.0) -> list[int]:
    """``ceil(N0 * factor**j)`` up to ``N_max``; ``N_max`` itself closes the list."""
    if N0 < 2 or N_max < N0 or factor <= 1:
        raise DomainError("need 2 <= N0 <= N_max and factor > 1")
    out, j = [], 0
    while True:
        N = math.ceil(N0 * factor ** j)
        if N > N_max:
            break
        if not out or N > out[-1]:
            out.append(N)
        j += 1
    if out[-1] != N_max:
        out.append(int(N_max))
    return out


def default_schedule(family: str, N_max: int | None = None) -> list[int]:
    return geometric_schedule(DEFAULT_N0, N_max or DEFAULT_N_MAX[family])


def thread_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("QMAXENT_THREADS")
    return max(1, int(env)) if env else 1


# -- sweeps --------------------------------------------------------------

def _row(spectrum: Spectrum, U, q, k, sigma, tol) -> Row:
    margin = beta_positivity_margin(spectrum, U)
    try:
        s = solve(spectrum, U, q, k=k, sigma=sigma, tol=tol)
    except QMaxEntError as exc:
        return Row(spectrum.N, math.nan, None, None, math.nan, margin, math.nan,
                   error=f"{type(exc).__name__}: {exc}")
    g1 = float(spectrum.degeneracy(1.0))
    return Row(spectrum.N, s.beta, s.delta, s.T, s.p1, margin, g1 * s.p1)


def sweep(base: Spectrum, U: float, q: float, N_schedule=None, k: float = 1.0,
          sigma: float | None = None, tol: float = DEFAULT_TOL,
          threads: int | None = None) -> LimitSequence:
    """Solve the truncations ``base.with_N(N)`` for every N in the schedule.

    Rows are independent; with several threads they are computed in
    parallel and always reported in ascending N.  A failing row is kept
    with its error message and the sweep continues.
    """
    schedule = sorted(set(int(n) for n in (N_schedule or default_schedule(base.family))))
    spectra = [base.with_N(N) for N in schedule]
    nthreads = thread_count(threads)
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            rows = list(pool.map(lambda sp: _row(sp, U, q, k, sigma, tol), spectra))
    else:
        rows = [_row(sp, U, q, k, sigma, tol) for sp in spectra]
    rows.sort(key=lambda r: r.N)
    params = {k_: v for k_, v in base.to_dict().items() if k_ != "N"}
    seq = LimitSequence(params, U, q, rows)
    _summarize(seq)
    return seq


def _summarize(seq: LimitSequence):
    good = [r for r in seq.good_rows if r.margin > 0]
    if len(good) >= 2:
        betas = [r.beta for r in good]
        seq.beta_monotone = all(b2 >= b1 for b1, b2 in zip(betas, betas[1:]))
        if seq.q < 1:
            deltas = [r.delta for r in good]
            seq.delta_monotone = all(d2 < d1 for d1, d2 in zip(deltas, deltas[1:]))
    if seq.good_rows:
        Ns = seq.column("N")
        seq.beta_limit = extrapolate(Ns, seq.column("beta"))
        Ts = seq.column("T")
        if np.all(np.isfinite(Ts)):
            seq.T_limit = extrapolate(Ns, Ts)
    if seq.q < 1:
        try:
            seq.fit = fit_rate(seq)
        except DegenerateFitError:
            seq.fit = None


def fit_rate(seq: LimitSequence, tail_count: int | None = 10) -> tuple[float, float]:
    """Least-squares ``delta_N ~ A N**(-c)`` over the last ``tail_count`` rows.

    Returns ``(c, A)``.  Needs at least 3 rows spanning 2 decades of N.
    """
    rows = [r for r in seq.good_rows if r.delta is not None and r.delta > 0]
    if tail_count is not None:
        rows = rows[-tail_count:]
    if len(rows) < 3:
        raise DegenerateFitError("need at least 3 rows with delta > 0")
    N = np.array([r.N for r in rows], dtype=float)
    d = np.array([r.delta for r in rows])
    if N[-1] / N[0] < 100:
        raise DegenerateFitError("rows span less than 2 decades of N")
    slope, icpt = np.polyfit(np.log(N), np.log(d), 1)
    return float(-slope), float(math.exp(icpt))


def extrapolate(Ns, values, c: float | None = None) -> float:
    """Limit of ``v_N = v_inf + a N**(-c)`` from the last three rows.

    ``c`` is estimated from the rows when not given.  Falls back to the last
    value when the sequence has converged to rounding or is not consistent
    with a power law.
    """
    Ns = np.asarray(Ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return float(v[-1])
    (n1, n2, n3), (v1, v2, v3) = Ns[-3:], v[-3:]
    d1, d2 = v2 - v1, v3 - v2
    scale = max(abs(v3), 1e-300)
    if abs(d2) <= 1e-13 * scale or abs(d1) <= 1e-13 * scale:
        return float(v3)
    if c is None:
        ratio = d2 / d1
        if not 0 < ratio < 1:
            return float(v3)
        # for a geometric schedule the difference ratio is (n2/n1)**(-c)
        c = -math.log(ratio) / math.log(n3 / n2)
        if not c > 0:
            return float(v3)
    f2, f3 = n2 ** (-c), n3 ** (-c)
    a = (v3 - v2) / (f3 - f2)
    return float(v3 - a * f3)


# -- hydrogen closed forms -----------------------------------------------

def lemma_constant(U: float, q: float, e_ion: float) -> float:
    """Limit of ``N**(3(1-q)) delta_N`` for hydrogen as stated in the lemma:
    ``3**(1-q) e_ion / (2**(1-q) (1-q) (e_ion-U)**(1-q) U**(1+q))``."""
    _check_lemma(U, q, e_ion)
    a = 1.0 - q
    return 3.0 ** a * e_ion / (2.0 ** a * a * (e_ion - U) ** a * U ** (1.0 + q))


def lemma_constant_corrected(U: float, q: float, e_ion: float) -> float:
    """Limit of ``N**(3(1-q)) delta_N`` that the sweeps actually approach.

    Equal to :func:`lemma_constant` times ``2**(1-q)``: the factor 2 in the
    hydrogen degeneracy ``2 n**2`` survives to the limit.
    """
    _check_lemma(U, q, e_ion)
    a = 1.0 - q
    return 3.0 ** a * e_ion / (a * (e_ion - U) ** a * U ** (1.0 + q))


def _check_lemma(U, q, e_ion):
    if not 0.0 < U < e_ion:
        raise DomainError("need 0 < U < e_ion")
    if not 0.0 < q < 1.0:
        raise DomainError("need 0 < q < 1")


def two_tier(U: float, e_ion: float) -> tuple[float, float]:
    """Limiting hydrogen masses: ground level and a terminal level at e_ion."""
    if not 0.0 < U < e_ion:
        raise DomainError("need 0 < U < e_ion")
    return 1.0 - U / e_ion, U / e_ion


# -- continuous-spectrum limits ------------------------------------------

@dataclass(frozen=True)
class DensityCurve:
    samples: list[tuple[float, float]]
    T: float
    q: float
    k: float = 1.0

    @property
    def e(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def rho(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


def density(e, T: float, q: float, k: float = 1.0):
    """Limiting energy density ``rho(e, T)`` of the continuous spectrum."""
    if not T > 0:
        raise DomainError("T must be positive")
    if not 0.5 <= q <= 1.0:
        raise DomainError("the density needs 1/2 <= q <= 1 (otherwise it is not normalizable)")
    e = np.asarray(e, dtype=float)
    kT = k * T
    if q == 1.0:
        return np.exp(-e / kT) / kT
    c = ((2.0 * q - 1.0) / q) ** (1.0 / (1.0 - q))
    return c * q_exp(1.0 / q - (2.0 * q - 1.0) * e / (q * q * kT), 2.0 - q) / kT


def density_curve(T: float, q: float, e_grid, k: float = 1.0) -> DensityCurve:
    e = np.asarray(e_grid, dtype=float)
    rho = np.atleast_1d(density(e, T, q, k))
    return DensityCurve([(float(a), float(b)) for a, b in zip(e, rho)], T, q, k)


def temperature_of_U(U: float, q: float, k: float = 1.0) -> float:
    """Continuous-limit temperature ``(2q-1) U/(q k)``."""
    return (2.0 * q - 1.0) * U / (q * k)


def U_of_temperature(T: float, q: float, k: float = 1.0) -> float:
    return q * k * T / (2.0 * q - 1.0)


def riemann_check(U: float, q: float, beta: float | None = None,
                  e_max: float | None = None, N: int | None = None) -> tuple[float, float]:
    """Both sides of the continuous beta equation.

    For ``q < 1`` returns ``(int w, int w**q)`` with
    ``w = (1 + (1-q) beta (e-U))**(1/(q-1))``; they agree at the root.
    For ``q = 1`` returns ``(int exp(-beta(e-U)) (e-U), 0)``.  The range is
    ``[0, e_max]`` (default infinity).  With ``N`` the integrals are replaced
    by the Riemann sums over ``N`` equally spaced levels.
    """
    if beta is None:
        beta = 1.0 / (q * U)
    if q == 1.0:
        def f1(e):
            return np.exp(-beta * (e - U)) * (e - U)

        def f2(e):
            return 0.0 * e
    else:
        if not 0.5 < q < 1.0:
            raise DomainError("the integrals converge for 1/2 < q < 1")

        def base(e):
            return 1.0 + (1.0 - q) * beta * (np.asarray(e, dtype=float) - U)

        def f1(e):
            return base(e) ** (1.0 / (q - 1.0))

        def f2(e):
            return base(e) ** (q / (q - 1.0))
    if N is not None:
        if e_max is None:
            raise DomainError("a Riemann sum needs e_max")
        e = np.linspace(0.0, e_max, int(N))
        h = e_max / (N - 1)
        return h * math.fsum(f1(e).tolist()), h * math.fsum(np.broadcast_to(f2(e), e.shape).tolist())
    out = []
    upper = math.inf if e_max is None else e_max
    for f in (f1, f2):
        # split at a few multiples of U so the adaptive rule sees the bulk
        pts = [0.0, U, 10 * U, 100 * U]
        parts = []
        for a, b in zip(pts, pts[1:] + [upper]):
            if a >= upper:
                break
            b = min(b, upper)
            parts.append(quad(lambda x: float(f(x)), a, b, epsabs=0.0, epsrel=1e-13,
                              limit=400)[0])
        out.append(math.fsum(parts))
    return out[0], out[1]


def uniform_temperature(U: float, q: float, e_max: float, N: int, m: int = 1,
                        k: float = 1.0) -> float:
    """Temperature of the uniform grid truncation (the U-T curve of the continuum)."""
    return solve(uniform_grid(N, e_max, m), U, q, k=k).T


def specific_heat_slope(q: float, U_grid, e_max: float, N: int, k: float = 1.0) -> float:
    """Slope dU/dT of a least-squares line through uniform-grid (T, U) points."""
    U = np.asarray(U_grid, dtype=float)
    T = np.array([uniform_temperature(u, q, e_max, N, k=k) for u in U])
    return float(np.polyfit(T, U, 1)[0])


# -- classical closed forms ---------------------------------------------

def oscillator_bg_beta(U: float, hbar_omega: float = 1.0) -> float:
    """Boltzmann-Gibbs structural parameter of the infinite oscillator."""
    return math.log((hbar_omega + U) / U) / hbar_omega


def oscillator_bg_probabilities(beta: float, n, hbar_omega: float = 1.0):
    n = np.asarray(n, dtype=float)
    x = beta * hbar_omega
    return np.exp(-x * (n - 1)) * -np.expm1(-x)


def box_bg_beta(U: float, gamma: float = 1.0, n_terms: int | None = None) -> float:
    """Boltzmann-Gibbs structural parameter of the infinite box, from
    ``sum exp(-beta e_n) / sum n**2 exp(-beta e_n) = gamma/(U + gamma)``."""
    target = gamma / (U + gamma)

    def F(lb):
        b = math.exp(lb)
        # enough terms for exp(-b gamma n**2) to fall below 1e-40
        n_max = n_terms or int(math.sqrt(92.0 / (b * gamma))) + 3
        n = np.arange(1, n_max + 1, dtype=float)
        w = np.exp(-b * gamma * (n * n - 1.0))
        return math.fsum(w.tolist()) / math.fsum((n * n * w).tolist()) - target

    return math.exp(brentq(F, math.log(1e-8 / gamma), math.log(1e3 / gamma),
                           xtol=1e-15, rtol=1e-15))


# -- infinite-spectrum limits for oscillator and box -----------------------

@dataclass(frozen=True)
class SeriesLimit:
    beta: float
    delta: float
    p1: float
    T: float


def _series_energy(family, scale):
    if family == "oscillator":
        return lambda n: (n - 1.0) * scale
    if family == "box":
        return lambda n: (n - 1.0) * (n + 1.0) * scale
    raise DomainError("series limits exist for 'oscillator' and 'box'")


def series_limit(family: str, U: float, q: float, scale: float = 1.0, k: float = 1.0,
                 head: int = 1 << 18) -> SeriesLimit:
    """Infinite-spectrum limit from the ratio series ``r_n = p_n/p_1``.

    Solves ``sum r_n (e_n - U) = 0`` for delta, then ``p1 = 1/sum r_n`` and
    the temperature with ``k_s = k**q scale**(1-q)``.  The first ``head``
    terms are summed exactly and the remainder is integrated in
    ``log x``.  Requires q above 1/2 (oscillator) or 1/3 (box), where both
    series converge and the limit is interior.
    """
    q_min = {"oscillator": 0.5, "box": 1.0 / 3.0}.get(family)
    e_of = _series_energy(family, scale)
    if not q_min < q < 1.0:
        raise DomainError(f"{family} series converge only for {q_min:.4g} < q < 1")
    if not U > 0:
        raise DomainError("U must be positive")
    L = 1.0 / ((1.0 - q) * U)
    s = 1.0 / (1.0 - q)
    n = np.arange(1, head + 1, dtype=float)
    e = e_of(n)
    a = head + 0.5

    def sums(delta):
        kappa = (L - delta) / (U * delta)
        r = np.exp(-s * np.log1p(kappa * e))

        def tail(fn):
            return _power_tail(fn, a)

        def rx(x):
            return math.exp(-s * math.log1p(kappa * e_of(x)))

        Rs = math.fsum(r.tolist()) + tail(rx)
        Re = math.fsum((r * (e - U)).tolist()) + tail(lambda x: rx(x) * (e_of(x) - U))
        return Rs, Re

    def F(ld):
        return sums(math.exp(ld))[1]

    lo, hi = math.log(L * 0.5), math.log(L * 0.5)
    while F(lo) > 0:
        lo -= math.log(4.0)
        if lo < math.log(L) - 690:
            raise DomainError("series root collapses onto the endpoint")
    while F(hi) < 0:
        hi = math.log(L - 0.5 * (L - math.exp(hi)))
        if L - math.exp(hi) < 1e-12 * L:
            raise DomainError("no root below the endpoint")
    ld = brentq(F, lo, hi, xtol=1e-14, rtol=1e-14)
    delta = math.exp(ld)
    beta = L - delta
    Rs, _ = sums(delta)
    p1 = 1.0 / Rs
    T = generalized_temperature(beta, p1, U, q, scale, k)
    return SeriesLimit(beta, delta, p1, T)


def _power_tail(fn, a, u_max=120.0):
    """``int_a^inf fn(x) dx`` for an integrand decaying like a power of x.

    Integrates in ``u = log(x/a)`` on unit panels until the remaining
    power-law tail, estimated from the local log-slope, is below 1e-17 of
    the accumulated value.
    """
    def g(u):
        x = a * math.exp(u)
        return fn(x) * x

    parts, u = [], 0.0
    while u < u_max:
        parts.append(quad(g, u, u + 1.0, epsabs=0.0, epsrel=1e-13, limit=100)[0])
        u += 1.0
        g1, g0 = g(u), g(u - 0.5)
        if g0 == 0.0 or g1 == 0.0:
            break
        # g ~ exp(-c u) beyond here; remainder g1/c
        c = 2.0 * math.log(abs(g0 / g1))
        if c > 0:
            rem = g1 / c
            if abs(rem) <= 1e-17 * abs(math.fsum(parts)) or u >= u_max:
                parts.append(rem)
                break
    return math.fsum(parts)


def generalized_temperature(beta: float, p1: float, U: float, q: float,
                            scale: float = 1.0, k: float = 1.0) -> float:
    """Limit temperature of the oscillator (scale = hbar omega) or box
    (scale = gamma) from the converged ``(beta, p1)``:
    ``(1/k) (p1**(1-q) (1 - (1-q) beta U) / (q beta scale**(1-q)))**(1/q)``."""
    inner = p1 ** (1.0 - q) * (1.0 - (1.0 - q) * beta * U) / (q * beta * scale ** (1.0 - q))
    return inner ** (1.0 / q) / k
