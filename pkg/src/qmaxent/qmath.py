"""q-deformed special functions, the spectrum-dependent scale factor, and
the entropic functional itself.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EntropicParams:
    """Parameters of the entropic functional.

    ``q = 1`` is legal and selects the Boltzmann-Gibbs formulas everywhere.
    """

    q: float
    k: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.q <= 1.0):
            raise DomainError(f"q must lie in (0, 1], got {self.q}")
        if not self.k > 0.0:
            raise DomainError(f"k must be positive, got {self.k}")
        if not self.sigma > 0.0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def classical(self) -> bool:
        return self.q == 1.0


def q_log(z, q):
    """q-logarithm ``(z**(1-q) - 1)/(1-q)`` for ``z >= 0``, ``q != 1``."""
    if q == 1.0:
        raise DomainError("q_log is defined for q != 1; use math.log")
    za = np.asarray(z, dtype=float)
    if np.any(za < 0) or np.any(np.isnan(za)):
        raise DomainError("q_log requires z >= 0")
    a = 1.0 - q
    with np.errstate(divide="ignore"):
        # expm1 form keeps precision for z near 1 and q near 1
        out = np.where(za > 0, np.expm1(a * np.log(np.where(za > 0, za, 1.0))) / a,
                       -1.0 / a if a > 0 else -np.inf)
    return float(out) if np.ndim(out) == 0 else out


def q_exp(z, q):
    """q-exponential ``[1 + (1-q) z]_+ ** (1/(1-q))``, ``q != 1``.

    For ``q < 1`` the result is exactly 0 where the base is non-positive.
    For ``q > 1`` the exponent is negative and the base reaching 0 is a
    pole; the result there is ``inf``.
    """
    if q == 1.0:
        raise DomainError("q_exp is defined for q != 1; use math.exp")
    za = np.asarray(z, dtype=float)
    a = 1.0 - q
    x = a * za
    base = 1.0 + x
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # log1p route avoids cancellation when the base is near 0 or 1
        mid = np.exp(np.log1p(np.where((base > 0) & (base < 2), x, 0.0)) / a)
        direct = np.power(np.where(base > 0, base, 1.0), 1.0 / a)
        out = np.where((base > 0) & (base < 2), mid, direct)
        out = np.where(base > 0, out, 0.0 if a > 0 else np.inf)
    return float(out) if np.ndim(out) == 0 else out


def signed_power(z, q):
    """``sign(z) * |z|**q``: the power used in the temperature postulate."""
    za = np.asarray(z, dtype=float)
    out = np.sign(za) * np.abs(za) ** q
    return float(out) if np.ndim(out) == 0 else out


def scale_factor(params: EntropicParams, e_max: float, W: float) -> float:
    """Spectrum-dependent scale factor ``k**q * (e_max/(W**sigma - 1))**(1-q)``.

    Returns ``k`` exactly when ``q == 1``.  ``W`` may be a float so that
    truncations with more microstates than fit in an int64 are allowed.
    """
    if params.q == 1.0:
        return params.k
    if not e_max > 0:
        raise DomainError(f"e_max must be positive, got {e_max}")
    if not W >= 2:
        raise DomainError(f"W must be at least 2, got {W}")
    log_ws = params.sigma * math.log(W)
    denom = math.expm1(log_ws)
    if denom <= 0.0:
        raise DomainError("W**sigma == 1")
    return math.exp(params.q * math.log(params.k)
                    + (1.0 - params.q) * (math.log(e_max) - math.log(denom)))


def log_scale_factor(params: EntropicParams, e_max: float, W: float) -> float:
    return math.log(scale_factor(params, e_max, W))


def entropy_value(p, params: EntropicParams, k_s: float | None = None,
                  degeneracy=None) -> float:
    """Entropy of a probability vector.

    ``p`` holds microstate probabilities.  With ``degeneracy`` given, ``p[n]``
    is the common probability of the ``degeneracy[n]`` microstates of level n.
    For ``q < 1`` returns ``k_s (sum p**q - 1)/(1-q)``; for ``q = 1`` returns
    ``k sum p ln(1/p)`` with ``0 ln(1/0) = 0``.
    """
    p = np.asarray(p, dtype=float)
    g = np.ones_like(p) if degeneracy is None else np.asarray(degeneracy, dtype=float)
    if np.any(p < 0):
        raise DomainError("probabilities must be non-negative")
    total = math.fsum((g * p).tolist())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"probabilities sum to {total!r}, not 1")
    if params.q == 1.0:
        pos = p > 0
        return params.k * math.fsum((-g[pos] * p[pos] * np.log(p[pos])).tolist())
    if k_s is None:
        raise DomainError("k_s is required for q < 1")
    s = math.fsum((g * p ** params.q).tolist())
    return k_s * (s - 1.0) / (1.0 - params.q)
