import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmaxent import kernels
from qmaxent._kernels_py import level_sums as py_level_sums
from qmaxent.solver import solve
from qmaxent.spectra import box, custom, hydrogen, oscillator, uniform_grid

compiled_only = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                                   reason="extension not built")


@pytest.fixture
def backend():
    """Restore the active backend after a test switches it."""
    initial = kernels.BACKEND
    yield kernels.set_backend
    kernels.set_backend(initial)


def test_python_backend_always_available():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_python_kernel_matches_direct_formula():
    rng = np.random.default_rng(3)
    e = np.sort(rng.uniform(0, 5, 200))
    e[0] = 0.0
    d = e.copy()
    g = rng.integers(1, 4, 200).astype(float)
    U, kappa, q = 1.2, 0.8, 0.6
    expo = 1 / (q - 1)
    Z, R, A, Q = py_level_sums(e, d, g, U, kappa, expo, False, True, q)
    w = (1 + kappa * d) ** expo
    assert Z == pytest.approx(math.fsum(g * w), rel=1e-14)
    assert R == pytest.approx(math.fsum(g * w * (e - U)), rel=1e-12)
    assert A == pytest.approx(math.fsum(g * w * abs(e - U)), rel=1e-14)
    assert Q == pytest.approx(math.fsum(g * w ** q), rel=1e-14)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        py_level_sums(np.zeros(3), np.zeros(3), np.ones(2), 0.0, 1.0, -2.0, False, False, 0.5)


@compiled_only
@given(seed=st.integers(0, 2**31), q=st.floats(0.05, 1.0), kappa=st.floats(1e-6, 1e6),
       boltzmann=st.booleans())
def test_backends_agree(seed, q, kappa, boltzmann):
    from qmaxent import _kernels
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5000))
    d = np.sort(rng.exponential(1.0, n))
    d[0] = 0.0
    e = d.copy()
    g = rng.integers(1, 10, n).astype(float)
    U = float(rng.uniform(0, e[-1] + 1))
    expo = 0.0 if q == 1.0 else 1 / (q - 1)
    a = _kernels.level_sums(e, d, g, U, kappa, expo, boltzmann or q == 1.0, True, q)
    b = py_level_sums(e, d, g, U, kappa, expo, boltzmann or q == 1.0, True, q)
    for x, y in zip(a, b):
        assert x == pytest.approx(y, rel=1e-13, abs=1e-300)


@compiled_only
def test_solutions_identical_across_backends(backend):
    cases = [(uniform_grid(6001, 30.0, 1), 1.0, 0.75), (hydrogen(10**7, 1.0), 0.5, 0.5),
             (box(500, 1.0), 2.0, 0.3), (oscillator(300, 1.0), 250.0, 0.7),
             (custom([(0, 1), (0.5, 1), (1, 1)]), 0.3, 0.5), (oscillator(50, 1.0), 3.0, 1.0)]
    results = {}
    for name in ("compiled", "python"):
        backend(name)
        results[name] = [solve(*c) for c in cases]
    for a, b in zip(results["compiled"], results["python"]):
        assert a.beta == pytest.approx(b.beta, rel=1e-13)
        assert a.p1 == pytest.approx(b.p1, rel=1e-12)
        assert a.S == pytest.approx(b.S, rel=1e-12)


def test_environment_variable_selects_fallback():
    code = "from qmaxent import kernels; print(kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"QMAXENT_PURE_PYTHON": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"
