"""Command-line interface: ``qmaxent solve | sweep | figure | saha | accept``.

Exit codes: 0 on success, 2 on a domain error (bad parameters), 3 when an
iterative method fails to converge.  Every CSV carries a ``# config:``
comment line with the settings that produced it.
"""

from __future__ import annotations

import argparse
import inspect
import sys

import numpy as np

from . import __version__, acceptance, figures, limits
from .errors import ConvergenceError, DomainError, QMaxEntError
from .hydrogen_saha import saha_table
from .outputs import RunConfig, load_config, to_csv, to_json, write_text
from .solver import solve
from .spectra import FAMILIES, from_mapping, load_spectrum, parse_levels

EXIT_OK, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 2, 3

SWEEP_COLUMNS = ["N", "beta", "delta", "T", "p1", "margin", "g1p1", "error"]


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(float(v)) for v in text.split(",") if v.strip()]


def _add_spectrum(p):
    g = p.add_argument_group("spectrum")
    g.add_argument("--family", choices=[f for f in FAMILIES if f != "custom"])
    g.add_argument("--n", dest="N", type=int, help="number of levels")
    g.add_argument("--emax", dest="e_max", type=float, help="uniform: top energy")
    g.add_argument("--m", type=int, help="uniform: degeneracy per level")
    g.add_argument("--hbar-omega", dest="hbar_omega", type=float)
    g.add_argument("--gamma", type=float, help="box: h^2/(8 m L^2)")
    g.add_argument("--e-ion", dest="e_ion", type=float, help="hydrogen: ionization energy")
    g.add_argument("--levels", help='explicit levels "e:g,e:g,..."')
    g.add_argument("--spectrum", dest="spectrum_file", help="TOML spectrum definition file")


def _add_common(p, u=True, q=True):
    if u:
        p.add_argument("--u", dest="U", type=float, help="internal energy")
    if q:
        p.add_argument("--q", type=float, help="entropic index in (0, 1]")
    p.add_argument("--k", type=float, help="Boltzmann-like constant (default 1)")
    p.add_argument("--sigma", type=float, help="scale-factor exponent")
    p.add_argument("--tol", type=float)


def _add_output(p, formats=("csv", "json")):
    p.add_argument("--output", "-o", help="output file (default stdout)")
    p.add_argument("--format", choices=formats)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmaxent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML run configuration; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one truncated problem")
    _add_spectrum(p)
    _add_common(p)
    p.add_argument("--head", type=int, default=10, help="probabilities to print")
    _add_output(p, ("text", "csv", "json"))

    p = sub.add_parser("sweep", help="truncation sweep toward the infinite spectrum")
    _add_spectrum(p)
    _add_common(p)
    p.add_argument("--n0", dest="N0", type=int)
    p.add_argument("--n-max", dest="N_max", type=int)
    p.add_argument("--factor", type=float)
    p.add_argument("--schedule", dest="N_schedule", type=_ints, help="explicit N list")
    p.add_argument("--threads", type=int, help="worker threads (or QMAXENT_THREADS)")
    _add_output(p)

    p = sub.add_parser("figure", help="emit the dataset behind one figure")
    p.add_argument("figure", type=int, choices=sorted(figures.BUILDERS))
    p.add_argument("--q-list", dest="q_list", type=_floats)
    p.add_argument("--points", type=int)
    p.add_argument("--k", type=float)
    p.add_argument("--emax", dest="e_max", type=float)
    p.add_argument("--n", dest="N", type=int)
    p.add_argument("--hbar-omega", dest="hbar_omega", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--e-ion", dest="e_ion", type=float)
    _add_output(p)

    p = sub.add_parser("saha", help="Saha ionization temperatures over a density grid")
    p.add_argument("--eta-min", dest="eta_min", type=float)
    p.add_argument("--eta-max", dest="eta_max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--x", dest="x_target", type=float, help="ionized fraction (0.999)")
    p.add_argument("--convention", choices=["auto", "printed", "conventional"])
    _add_output(p)

    p = sub.add_parser("accept", help="run the acceptance criteria")
    p.add_argument("--only", type=_ints, help="criterion numbers, e.g. 1,2,9")
    return parser


# -- configuration -------------------------------------------------------

_NOT_CONFIG = {"config", "head", "only", "spectrum_file"}


def make_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if getattr(args, "spectrum_file", None):
        overrides.update(load_spectrum(args.spectrum_file).to_dict())
    if getattr(args, "levels", None):
        overrides["levels"] = load_levels(args.levels)
    cfg = cfg.merged(overrides)
    cfg.command = args.command
    return cfg


def load_levels(text):
    sp = parse_levels(text)
    return sp.to_dict()["levels"]


def spectrum_of(cfg: RunConfig, N=None):
    if cfg.levels is not None:
        return from_mapping({"levels": cfg.levels})
    if cfg.family is None:
        raise DomainError("give --family (with its parameters), --levels or --spectrum")
    spec = {"family": cfg.family, "N": N if N is not None else cfg.N}
    for key in ("e_max", "m", "hbar_omega", "gamma", "e_ion"):
        if getattr(cfg, key) is not None:
            spec[key] = getattr(cfg, key)
    return from_mapping(spec)


def _require(cfg, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise DomainError(f"missing required setting(s): {', '.join(missing)}")


def _emit(cfg, columns, rows, comments=(), extra=None, stream=None):
    stream = stream or sys.stdout
    if (cfg.format or "csv") == "json":
        text = to_json(columns, rows, cfg, extra)
    else:
        text = to_csv(columns, rows, cfg, list(comments))
    write_text(text, cfg.output, stream)


# -- commands ------------------------------------------------------------

def cmd_solve(cfg: RunConfig, head: int = 10, stream=None) -> int:
    stream = stream or sys.stdout
    _require(cfg, "U", "q")
    sp = spectrum_of(cfg)
    s = solve(sp, cfg.U, cfg.q, k=cfg.k if cfg.k is not None else 1.0, sigma=cfg.sigma,
              **({"tol": cfg.tol} if cfg.tol else {}))
    record = [("spectrum", sp.label), ("U", cfg.U), ("q", cfg.q), ("beta", s.beta),
              ("delta", s.delta), ("T", s.T), ("lambda1", s.lambda1),
              ("lambda2", s.lambda2), ("S", s.S), ("k_s", s.k_s), ("Z", s.Z),
              ("p1", s.p1), ("iterations", s.iterations)]
    p_head = [] if s.p is None else [float(v) for v in s.p[:head]]
    fmt = cfg.format or "text"
    if fmt == "text":
        lines = [f"{name:<10} {value:.17g}" if isinstance(value, float) else
                 f"{name:<10} {value}" for name, value in record]
        if p_head:
            lines.append("p[:%d]     " % len(p_head) + " ".join(f"{v:.17g}" for v in p_head))
        write_text("\n".join(lines) + "\n", cfg.output, stream)
    else:
        rows = record + [(f"p[{i + 1}]", v) for i, v in enumerate(p_head)]
        _emit(cfg, ["name", "value"], rows, stream=stream)
    return EXIT_OK


def sweep_schedule(cfg: RunConfig) -> list[int]:
    if cfg.N_schedule:
        return sorted(set(int(n) for n in cfg.N_schedule))
    N0 = cfg.N0 or limits.DEFAULT_N0
    N_max = cfg.N_max or limits.DEFAULT_N_MAX.get(cfg.family or "custom", 10**5)
    return limits.geometric_schedule(N0, N_max, cfg.factor or 2.0)


def cmd_sweep(cfg: RunConfig, stream=None) -> int:
    _require(cfg, "U", "q")
    if cfg.levels is not None:
        raise DomainError("sweeps need a spectrum family")
    base = spectrum_of(cfg, N=2)
    seq = limits.sweep(base, cfg.U, cfg.q, sweep_schedule(cfg),
                       k=cfg.k if cfg.k is not None else 1.0, sigma=cfg.sigma,
                       **({"tol": cfg.tol} if cfg.tol else {}), threads=cfg.threads)
    rows = [[getattr(r, c) for c in SWEEP_COLUMNS] for r in seq.rows]
    comments = [f"beta_limit: {_g(seq.beta_limit)}", f"T_limit: {_g(seq.T_limit)}",
                f"beta_monotone: {seq.beta_monotone}", f"delta_monotone: {seq.delta_monotone}"]
    fit = None
    if seq.fit is not None:
        fit = {"exponent": seq.fit[0], "prefactor": seq.fit[1]}
        comments.insert(0, f"fit: delta_N ~ {_g(seq.fit[1])} * N^-{_g(seq.fit[0])}")
    extra = {"fit": fit, "beta_limit": seq.beta_limit, "T_limit": seq.T_limit,
             "beta_monotone": seq.beta_monotone, "delta_monotone": seq.delta_monotone}
    _emit(cfg, SWEEP_COLUMNS, rows, comments, extra, stream)
    return EXIT_OK


def _g(v):
    return "none" if v is None else f"{v:.17g}"


def cmd_figure(cfg: RunConfig, stream=None) -> int:
    _require(cfg, "figure")
    builder = figures.BUILDERS.get(cfg.figure)
    if builder is None:
        raise DomainError(f"unknown figure {cfg.figure}")
    accepted = inspect.signature(builder).parameters
    overrides = {name: getattr(cfg, name) for name in
                 ("q_list", "points", "k", "e_max", "N", "hbar_omega", "gamma", "e_ion")
                 if name in accepted and getattr(cfg, name) is not None}
    if "q_list" in overrides:
        overrides["q_list"] = tuple(overrides["q_list"])
    rows = figures.build(cfg.figure, **overrides)
    _emit(cfg, figures.COLUMNS, rows, [f"figure {cfg.figure}: {figures.FIGURES[cfg.figure]}"],
          stream=stream)
    return EXIT_OK


def cmd_saha(cfg: RunConfig, stream=None) -> int:
    rows, conv = saha_table(cfg.eta_min or 1e13, cfg.eta_max or 1e27, cfg.points or 15,
                            cfg.x_target or 0.999, cfg.convention or "auto")
    T = np.array([r[1] for r in rows])
    comments = [f"convention: {conv}", f"T_range: {_g(T.min())} {_g(T.max())}"]
    _emit(cfg, ["eta", "T_ion"], rows, comments, {"convention": conv}, stream)
    return EXIT_OK


def cmd_accept(only=None, stream=None) -> int:
    stream = stream or sys.stdout
    results = acceptance.run(only, stream=stream)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria pass", file=stream)
    return EXIT_OK if n_pass == len(results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "accept":
            return cmd_accept(args.only)
        cfg = make_config(args)
        if args.command == "solve":
            return cmd_solve(cfg, args.head)
        return {"sweep": cmd_sweep, "figure": cmd_figure, "saha": cmd_saha}[args.command](cfg)
    except DomainError as exc:
        print(f"qmaxent: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"qmaxent: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except QMaxEntError as exc:
        print(f"qmaxent: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
