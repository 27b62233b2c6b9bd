"""Generalized maximum-entropy distributions and temperatures over finite
energy spectra, with truncation sweeps toward their infinite-spectrum limits."""

from .errors import (BracketError, ConvergenceError, DomainError, InfeasibleError,
                     InfiniteTemperature, QMaxEntError)
from .qmath import EntropicParams, entropy_value, q_exp, q_log, scale_factor, signed_power
from .solver import MaxEntSolution, distribution, residual, solve, solve_beta
from .spectra import Spectrum, box, custom, hydrogen, oscillator, uniform_grid

__version__ = "0.1.0"

__all__ = [
    "BracketError", "ConvergenceError", "DomainError", "InfeasibleError",
    "InfiniteTemperature", "QMaxEntError", "EntropicParams", "entropy_value", "q_exp",
    "q_log", "scale_factor", "signed_power", "MaxEntSolution", "distribution",
    "residual", "solve", "solve_beta", "Spectrum", "box", "custom", "hydrogen",
    "oscillator", "uniform_grid",
]
