"""Backend selection for the level-sum kernel.

The compiled extension is preferred.  Setting ``QMAXENT_PURE_PYTHON=1``
before import, or calling :func:`set_backend`, selects the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py.level_sums}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled.level_sums

if _compiled is not None and os.environ.get("QMAXENT_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_level_sums = _BACKENDS[BACKEND]


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend name."""
    global BACKEND, _level_sums
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; "
                         f"have {available_backends()}")
    previous = BACKEND
    BACKEND = name
    _level_sums = _BACKENDS[name]
    return previous


def level_sums(e, d, g, U, kappa, expo, boltzmann, want_q, q):
    """Degeneracy-weighted sums ``(Z, R, A, Q)`` over one block of levels.

    See ``_kernels_py.level_sums`` for the contract.
    """
    return _level_sums(e, d, g, float(U), float(kappa), float(expo),
                       bool(boltzmann), bool(want_q), float(q))
