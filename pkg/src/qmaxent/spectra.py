"""Energy spectra: the four model families plus explicit custom level lists.

A spectrum is the ordered list of distinct levels ``0 = e_1 < ... < e_N``
with positive integer degeneracies.  Family spectra are defined by closed
forms in the level index ``n``, so they never need to be materialized in
full: arrays are cached up to ``MATERIALIZE_LIMIT`` levels and larger
truncations are served block by block (see :meth:`Spectrum.iter_chunks`).
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError

MATERIALIZE_LIMIT = 1 << 20
# level indices must stay exactly representable as doubles
MAX_LEVELS = 1 << 53

FAMILIES = ("uniform", "oscillator", "box", "hydrogen", "custom")

# sigma exponent in the scale factor that makes each family's limit finite
DEFAULT_SIGMA = {"uniform": 1.0, "oscillator": 1.0, "box": 2.0,
                 "hydrogen": 1.0, "custom": 1.0}


@dataclass(frozen=True)
class EnergySplit:
    """Index ``t`` with ``e_t < U <= e_{t+1}``."""

    U: float
    t: int


@dataclass(frozen=True, eq=False)
class Spectrum:
    family: str
    N: int
    params: Mapping[str, float] = field(default_factory=dict)
    explicit_e: np.ndarray | None = field(default=None, repr=False)
    explicit_g: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown spectrum family {self.family!r}")
        if not 2 <= self.N <= MAX_LEVELS:
            raise DomainError(f"N must lie in [2, 2**53], got {self.N}")

    # -- closed forms, vectorized over float level indices n >= 1 ---------

    def energy(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        p = self.params
        if self.family == "uniform":
            return (n - 1.0) * (p["e_max"] / (self.N - 1))
        if self.family == "oscillator":
            return (n - 1.0) * p["hbar_omega"]
        if self.family == "box":
            return (n - 1.0) * (n + 1.0) * p["gamma"]
        if self.family == "hydrogen":
            return (1.0 - 1.0 / (n * n)) * p["e_ion"]
        return self.explicit_e[n.astype(np.int64) - 1]

    def degeneracy(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        if self.family == "uniform":
            return np.full_like(n, float(self.params["m"]))
        if self.family in ("oscillator", "box"):
            return np.ones_like(n)
        if self.family == "hydrogen":
            return 2.0 * n * n
        return self.explicit_g[n.astype(np.int64) - 1]

    def top_gap(self, n, m=None) -> np.ndarray:
        """``e_max - e_n`` computed without cancellation.

        ``m = N - n`` may be passed when it is known more accurately than
        ``n`` itself (quadrature nodes near the top of a huge truncation).
        """
        n = np.asarray(n, dtype=np.float64)
        N = float(self.N)
        m = N - n if m is None else np.asarray(m, dtype=np.float64)
        p = self.params
        if self.family == "uniform":
            return m * (p["e_max"] / (self.N - 1))
        if self.family == "oscillator":
            return m * p["hbar_omega"]
        if self.family == "box":
            return m * (2.0 * N - m) * p["gamma"]
        if self.family == "hydrogen":
            return p["e_ion"] * (m / n) * ((2.0 * N - m) / n) / (N * N)
        return self.e_max - self.energy(n)

    # -- aggregate properties --------------------------------------------

    @property
    def smooth(self) -> bool:
        """True when levels follow a smooth closed form in ``n``."""
        return self.family != "custom"

    @cached_property
    def e_max(self) -> float:
        if self.family == "uniform":
            return float(self.params["e_max"])
        return float(self.energy(float(self.N)))

    @cached_property
    def W(self) -> float:
        """Total microstate count (as a float; may exceed 2**63)."""
        N = self.N
        if self.family == "uniform":
            return float(self.params["m"]) * N
        if self.family in ("oscillator", "box"):
            return float(N)
        if self.family == "hydrogen":
            return float(N * (N + 1) * (2 * N + 1) // 3)
        return math.fsum(self.explicit_g.tolist())

    @property
    def default_sigma(self) -> float:
        return DEFAULT_SIGMA[self.family]

    @property
    def label(self) -> str:
        if self.family == "custom":
            return f"custom(N={self.N})"
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.family}(N={self.N}, {inner})"

    def to_dict(self) -> dict:
        if self.family == "custom":
            return {"levels": [[float(e), int(g)] for e, g in
                               zip(self.explicit_e, self.explicit_g)]}
        return {"family": self.family, "N": self.N, **self.params}

    # -- materialization ---------------------------------------------------

    def block(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(n, e_n, g_n)`` for levels ``start..stop`` inclusive."""
        n = np.arange(start, stop + 1, dtype=np.float64)
        return n, self.energy(n), self.degeneracy(n)

    @cached_property
    def _arrays(self):
        if self.N > MATERIALIZE_LIMIT:
            raise DomainError(f"{self.label} has more than {MATERIALIZE_LIMIT} "
                              "levels; use iter_chunks()")
        if self.family == "custom":
            return self.explicit_e, self.explicit_g
        _, e, g = self.block(1, self.N)
        e.setflags(write=False)
        g.setflags(write=False)
        return e, g

    @property
    def energies(self) -> np.ndarray:
        return self._arrays[0]

    @property
    def degeneracies(self) -> np.ndarray:
        return self._arrays[1]

    @property
    def levels(self) -> list[tuple[float, int]]:
        e, g = self._arrays
        return [(float(a), int(b)) for a, b in zip(e, g)]

    def iter_chunks(self, size: int = 1 << 16) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """Stream ``(e, g)`` blocks in ascending level order."""
        for start in range(1, self.N + 1, size):
            _, e, g = self.block(start, min(self.N, start + size - 1))
            yield e, g

    def with_N(self, N: int) -> "Spectrum":
        """Same family and parameters truncated at ``N`` levels."""
        if self.family == "custom":
            raise DomainError("custom spectra cannot be re-truncated")
        return Spectrum(self.family, N, dict(self.params))


# -- constructors ---------------------------------------------------------

def uniform_grid(N: int, e_max: float, m: int = 1) -> Spectrum:
    """``N`` equally spaced levels on ``[0, e_max]``, each ``m``-fold degenerate."""
    if not e_max > 0:
        raise DomainError("e_max must be positive")
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    return Spectrum("uniform", int(N), {"e_max": float(e_max), "m": int(m)})


def oscillator(N: int, hbar_omega: float = 1.0) -> Spectrum:
    """Harmonic oscillator shifted so that ``e_1 = 0``."""
    if not hbar_omega > 0:
        raise DomainError("hbar_omega must be positive")
    return Spectrum("oscillator", int(N), {"hbar_omega": float(hbar_omega)})


def box(N: int, gamma: float = 1.0) -> Spectrum:
    """Particle in a one-dimensional box: ``e_n = (n**2 - 1) gamma``."""
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    return Spectrum("box", int(N), {"gamma": float(gamma)})


def hydrogen(N: int, e_ion: float = 13.6) -> Spectrum:
    """Bound hydrogen levels ``(1 - 1/n**2) e_ion`` with degeneracy ``2 n**2``."""
    if not e_ion > 0:
        raise DomainError("e_ion must be positive")
    return Spectrum("hydrogen", int(N), {"e_ion": float(e_ion)})


def custom(levels) -> Spectrum:
    """Explicit spectrum from ``[(e, g), ...]``; must start at 0 and increase."""
    arr = [(float(e), g) for e, g in levels]
    if len(arr) < 2:
        raise DomainError("a spectrum needs at least two levels")
    e = np.array([a for a, _ in arr], dtype=np.float64)
    gs = [b for _, b in arr]
    if any(int(b) != b or b < 1 for b in gs):
        raise DomainError("degeneracies must be positive integers")
    g = np.array(gs, dtype=np.float64)
    if e[0] != 0.0:
        raise DomainError("the lowest level must be 0")
    if np.any(np.diff(e) <= 0):
        raise DomainError("levels must be strictly increasing")
    e.setflags(write=False)
    g.setflags(write=False)
    return Spectrum("custom", len(arr), {}, e, g)


def from_family(family: str, N: int | None = None, **params) -> Spectrum:
    """Build a spectrum from a family name and keyword parameters."""
    if family == "custom":
        return custom(params["levels"])
    if N is None:
        raise DomainError("N is required for family spectra")
    if family == "uniform":
        return uniform_grid(N, params.get("e_max", 1.0), params.get("m", 1))
    if family == "oscillator":
        return oscillator(N, params.get("hbar_omega", 1.0))
    if family == "box":
        return box(N, params.get("gamma", 1.0))
    if family == "hydrogen":
        return hydrogen(N, params.get("e_ion", 13.6))
    raise DomainError(f"unknown spectrum family {family!r}")


def from_mapping(spec: Mapping) -> Spectrum:
    """Spectrum from a parsed definition file (``family`` + params or ``levels``)."""
    spec = dict(spec)
    if "levels" in spec:
        return custom(spec["levels"])
    family = spec.pop("family", None)
    if family is None:
        raise DomainError("spectrum definition needs 'family' or 'levels'")
    N = spec.pop("N", spec.pop("n", None))
    return from_family(family, None if N is None else int(N), **spec)


def load_spectrum(path) -> Spectrum:
    """Read a TOML spectrum definition file."""
    import tomli

    with open(path, "rb") as fh:
        data = tomli.load(fh)
    return from_mapping(data.get("spectrum", data))


def parse_levels(text: str) -> Spectrum:
    """Parse ``"e:g,e:g,..."`` (``:g`` optional, default 1)."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        e, _, g = item.partition(":")
        out.append((float(e), int(g) if g else 1))
    return custom(out)


# -- derived quantities ---------------------------------------------------

def split(spectrum: Spectrum, U: float) -> EnergySplit:
    """Return ``t`` with ``e_t < U <= e_{t+1}``."""
    if not 0.0 < U < spectrum.e_max:
        raise DomainError(f"U={U!r} outside (0, e_max={spectrum.e_max!r})")
    lo, hi = 1, spectrum.N  # e_lo < U <= e_hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if float(spectrum.energy(float(mid))) < U:
            lo = mid
        else:
            hi = mid
    return EnergySplit(U, lo)


def beta_positivity_margin(spectrum: Spectrum, U: float) -> float:
    """``sum_n g_n (e_n - U)``; positive certifies a positive structural parameter."""
    N = spectrum.N
    p = spectrum.params
    if spectrum.family == "uniform":
        return p["m"] * N * (p["e_max"] / 2.0 - U)
    if spectrum.family == "oscillator":
        return N * ((N - 1) * p["hbar_omega"] / 2.0 - U)
    if spectrum.family == "box":
        return N * ((N - 1) * (2 * N + 5) * p["gamma"] / 6.0 - U)
    if spectrum.family == "hydrogen":
        return (p["e_ion"] - U) * (N * (N + 1) * (2 * N + 1) / 3.0) - 2.0 * N * p["e_ion"]
    e, g = spectrum.energies, spectrum.degeneracies
    return math.fsum((g * (e - U)).tolist())
