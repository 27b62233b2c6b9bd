"""Degeneracy-weighted level sums over a spectrum, exact or accelerated.

For a given anchor side and weight shape the solver needs

    Z = sum g w,   R = sum g w E,   A = sum g w |E|,   Q = sum g w**q

with ``w`` the weight relative to an anchor level (ground level when the
structural parameter is positive, top level when it is negative).

Spectra with at most ``MATERIALIZE_LIMIT`` levels, and all custom
spectra, are summed exactly.  Larger family truncations are summed
exactly over a head block and a top block of ``HEAD`` levels each; the
smooth middle is replaced by a midpoint-rule integral evaluated with
Gauss-Legendre panels graded geometrically away from both ends.  Pass
``exact=True`` to stream every level instead (slow, used for checks).
"""

from __future__ import annotations

import math
import threading
import weakref

import numpy as np

from . import kernels
from .spectra import MATERIALIZE_LIMIT, Spectrum

HEAD = 1 << 16
CHUNK = 1 << 20
PANEL_WIDTH = 0.5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)

LOW, HIGH = 1, -1


class _Block:
    """Level data for one kernel call: energies, distance to the top, weights."""

    __slots__ = ("e", "top", "g")

    def __init__(self, e, top, g):
        self.e = np.ascontiguousarray(e, dtype=np.float64)
        self.top = np.ascontiguousarray(top, dtype=np.float64)
        self.g = np.ascontiguousarray(g, dtype=np.float64)

    def distance(self, side):
        return self.e if side == LOW else self.top


def _graded_panels(length, offset):
    """Gauss-Legendre nodes ``t`` and weights on ``[0, length]``.

    Panels have equal width in ``log(t + offset)``, so node spacing grows
    in proportion to the distance from the graded end.
    """
    ua, ub = math.log(offset), math.log(length + offset)
    m = max(1, math.ceil((ub - ua) / PANEL_WIDTH))
    edges = np.linspace(ua, ub, m + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    jac = np.exp(u)
    t = jac - offset
    w = (half[:, None] * _GL_W[None, :]).ravel() * jac
    return t, w


def quadrature_block(spectrum: Spectrum, first: int, last: int) -> _Block:
    """Midpoint-rule surrogate for the levels ``first..last``.

    The sum over integer ``n`` is replaced by the integral over
    ``[first - 1/2, last + 1/2]``; the left half is graded from its left
    end, the right half toward the top of the spectrum.
    """
    a, b = first - 0.5, last + 0.5
    mid = 0.5 * (a + b)
    tl, wl = _graded_panels(mid - a, a)
    xl = a + tl
    # right half: s is the distance below b, so N - x = (N - b) + s exactly
    gap_b = spectrum.N - b
    tr, wr = _graded_panels(b - mid, gap_b)
    xr = b - tr
    mr = gap_b + tr
    x = np.concatenate([xl, xr])
    w = np.concatenate([wl, wr])
    top = np.concatenate([spectrum.top_gap(xl), spectrum.top_gap(xr, mr)])
    return _Block(spectrum.energy(x), top, spectrum.degeneracy(x) * w)


class LevelEngine:
    """Evaluates the weighted level sums for one spectrum."""

    def __init__(self, spectrum: Spectrum, exact: bool = False):
        self.spectrum = spectrum
        self.N = spectrum.N
        self.streaming = False
        self.accelerated = False
        if not spectrum.smooth or spectrum.N <= MATERIALIZE_LIMIT:
            e, g = spectrum.energies, spectrum.degeneracies
            n = np.arange(1, spectrum.N + 1, dtype=np.float64)
            self.blocks = [_Block(e, spectrum.top_gap(n), g)]
        elif exact:
            self.streaming = True
            self.blocks = []
        else:
            self.accelerated = True
            N = spectrum.N
            head_n, head_e, head_g = spectrum.block(1, HEAD)
            top_n, top_e, top_g = spectrum.block(N - HEAD + 1, N)
            self.blocks = [
                _Block(head_e, spectrum.top_gap(head_n), head_g),
                quadrature_block(spectrum, HEAD + 1, N - HEAD),
                _Block(top_e, spectrum.top_gap(top_n), top_g),
            ]

    def _iter_blocks(self):
        if not self.streaming:
            yield from self.blocks
            return
        sp = self.spectrum
        for start in range(1, self.N + 1, CHUNK):
            n, e, g = sp.block(start, min(self.N, start + CHUNK - 1))
            yield _Block(e, sp.top_gap(n), g)

    def sums(self, side, U, kappa, expo, boltzmann, want_q=False, q=1.0):
        """Return ``(Z, R, A, Q)`` for anchor ``side`` (``LOW`` or ``HIGH``).

        The relative weight of a level at distance ``d`` from the anchor is
        ``exp(-kappa d)`` when ``boltzmann`` and ``(1 + kappa d)**expo``
        otherwise.
        """
        parts = [kernels.level_sums(b.e, b.distance(side), b.g, U, kappa, expo,
                                    boltzmann, want_q, q)
                 for b in self._iter_blocks()]
        if len(parts) == 1:
            return parts[0]
        return tuple(math.fsum(col) for col in zip(*parts))

    @property
    def materialized(self) -> bool:
        return len(self.blocks) == 1 and not self.streaming

    def weights(self, side, kappa, expo, boltzmann) -> np.ndarray:
        """Relative weights of every level (materialized spectra only)."""
        if not self.materialized:
            raise ValueError("per-level weights need a materialized spectrum")
        return relative_weight(self.blocks[0].distance(side), kappa, expo, boltzmann)

    def anchor_distance_of_ground(self, side) -> float:
        return 0.0 if side == LOW else float(self.spectrum.top_gap(1.0))


def relative_weight(d, kappa, expo, boltzmann):
    d = np.asarray(d, dtype=np.float64)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        lw = -kappa * d if boltzmann else expo * np.log1p(kappa * d)
        lw = np.where(d == 0.0, 0.0, lw)
        return np.exp(lw)


_ENGINES: "weakref.WeakKeyDictionary[Spectrum, dict]" = weakref.WeakKeyDictionary()
_LOCK = threading.Lock()


def engine_for(spectrum: Spectrum, exact: bool = False) -> LevelEngine:
    """Cached engine per spectrum (thread-safe)."""
    with _LOCK:
        per = _ENGINES.setdefault(spectrum, {})
        eng = per.get(exact)
    if eng is None:
        eng = LevelEngine(spectrum, exact=exact)
        with _LOCK:
            eng = per.setdefault(exact, eng)
    return eng
