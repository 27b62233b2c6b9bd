"""Datasets behind the seven figures, as ``(x, y, series)`` rows."""

from __future__ import annotations

import math

import numpy as np

from .hydrogen_saha import E_ION_EV, K_B_EV, hydrogen_T, t_ion
from .limits import (U_of_temperature, box_bg_beta, density, oscillator_bg_beta,
                     series_limit, uniform_temperature)
from .oracle import value_curve
from .qmath import EntropicParams, scale_factor
from .spectra import custom

COLUMNS = ["x", "y", "series"]
FIGURES = {
    1: "maximized entropy S(U) on the three-level spectrum {0, 0.5, 1}",
    2: "U against T, uniform spectrum approaching the continuum",
    3: "limiting energy density rho(e, T) at k = T = 1",
    4: "U against T, harmonic oscillator",
    5: "U against T, one-dimensional box",
    6: "U against T, hydrogen",
    7: "log10 of the critical ionization temperature against q",
}


def _q_label(q):
    return "BG" if q == 1.0 else f"q={q:g}"


def figure1(q_list=(0.2, 0.3, 0.8, 1.0), points=101, k=1.0):
    sp = custom([(0.0, 1), (0.5, 1), (1.0, 1)])
    U = np.linspace(0.0, 1.0, points)
    rows = []
    for q in q_list:
        k_s = scale_factor(EntropicParams(q, k), sp.e_max, sp.W)
        rows += [(u, s, _q_label(q)) for u, s in value_curve(sp, q, k_s, U)]
    return rows


def figure2(q_list=(0.6, 0.8, 0.95, 1.0), points=12, k=1.0, e_max=1e8, N=10**12):
    """Truncated uniform spectra deep in the N >> e_max >> 1 regime; the
    ``limit`` series is the closed-form line U = q k T/(2q - 1)."""
    U = np.linspace(0.25, 3.0, points)
    rows = []
    for q in q_list:
        for u in U:
            rows.append((uniform_temperature(float(u), q, e_max, N, k=k), float(u), _q_label(q)))
        for T in U:
            rows.append((float(T), U_of_temperature(float(T), q, k), _q_label(q) + " limit"))
    return rows


def figure3(q_list=(0.6, 0.8, 0.95, 1.0), points=201, e_hi=10.0, k=1.0, T=1.0):
    e = np.linspace(0.0, e_hi, points)
    rows = []
    for q in q_list:
        rows += [(float(a), float(b), _q_label(q)) for a, b in zip(e, density(e, T, q, k))]
    return rows


def _trap_figure(family, q_list, points, k, scale):
    U = np.linspace(0.25, 3.0, points)
    rows = []
    for q in q_list:
        for u in U:
            u = float(u)
            if q == 1.0:
                beta = (oscillator_bg_beta(u, scale) if family == "oscillator"
                        else box_bg_beta(u, scale))
                T = 1.0 / (k * beta)
            else:
                T = series_limit(family, u, q, scale, k).T
            rows.append((T, u, _q_label(q)))
    return rows


def figure4(q_list=(0.6, 0.8, 0.95, 1.0), points=12, k=1.0, hbar_omega=1.0):
    return _trap_figure("oscillator", q_list, points, k, hbar_omega)


def figure5(q_list=(0.6, 0.8, 0.95, 1.0), points=12, k=1.0, gamma=1.0):
    return _trap_figure("box", q_list, points, k, gamma)


def figure6(q_list=(0.3, 0.5, 0.7), points=101, k=1.0, e_ion=1.0):
    U = np.linspace(e_ion / points, e_ion, points)
    return [(hydrogen_T(float(u), q, e_ion, k), float(u), _q_label(q))
            for q in q_list for u in U]


def figure7(points=99, k=K_B_EV, e_ion=E_ION_EV):
    qs = np.linspace(0.01, 0.99, points)
    return [(float(q), math.log10(t_ion(float(q), e_ion, k)), "log10 T_ion")
            for q in qs]


BUILDERS = {1: figure1, 2: figure2, 3: figure3, 4: figure4, 5: figure5,
            6: figure6, 7: figure7}


def build(figure_id: int, **overrides):
    if figure_id not in BUILDERS:
        raise KeyError(figure_id)
    kwargs = {k: v for k, v in overrides.items() if v is not None}
    return BUILDERS[figure_id](**kwargs)
