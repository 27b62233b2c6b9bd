"""Run configuration (TOML) and deterministic CSV / JSON emission.

Every CSV starts with a ``# config: {...}`` comment holding the full run
configuration, then a header row.  Floats are written with 17 significant
digits so they round-trip exactly.  JSON output mirrors the CSV columns
and adds a ``meta`` block with the package version and a SHA-256 hash of
the canonical configuration.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import tomli
import tomli_w

from .errors import DomainError


EXECUTION_KEYS = ("threads", "output")


@dataclass
class RunConfig:
    """Parameters of one CLI invocation; ``None`` means "not set"."""

    command: str = "solve"
    family: str | None = None
    N: int | None = None
    e_max: float | None = None
    m: int | None = None
    hbar_omega: float | None = None
    gamma: float | None = None
    e_ion: float | None = None
    levels: list | None = None
    U: float | None = None
    U_grid: list | None = None
    q: float | None = None
    q_list: list | None = None
    k: float | None = None
    sigma: float | None = None
    tol: float | None = None
    N_schedule: list | None = None
    N0: int | None = None
    N_max: int | None = None
    factor: float | None = None
    figure: int | None = None
    eta_min: float | None = None
    eta_max: float | None = None
    points: int | None = None
    x_target: float | None = None
    convention: str | None = None
    threads: int | None = None
    output: str | None = None
    format: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if not d.get("extra"):
            d.pop("extra", None)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def merged(self, overrides: dict) -> "RunConfig":
        """Copy with every non-``None`` override applied."""
        d = asdict(self)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(d)

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_toml(cls, text: str) -> "RunConfig":
        return cls.from_dict(tomli.loads(text))

    def record(self) -> dict:
        """Settings that determine the results; where they are written and
        how many threads computed them are left out."""
        return {k: v for k, v in self.to_dict().items() if k not in EXECUTION_KEYS}

    def canonical_json(self) -> str:
        return json.dumps(self.record(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        return RunConfig.from_dict(tomli.load(fh))


def save_config(cfg: RunConfig, path):
    with open(path, "wb") as fh:
        tomli_w.dump(cfg.to_dict(), fh)


def fmt(v) -> str:
    """Lossless text form of one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    try:
        return fmt(float(v))
    except (TypeError, ValueError):
        return str(v)


def to_csv(columns: list[str], rows, cfg: RunConfig | None = None,
           comments: list[str] | None = None) -> str:
    buf = io.StringIO(newline="")
    if cfg is not None:
        buf.write(f"# config: {cfg.canonical_json()}\n")
    for c in comments or []:
        buf.write(f"# {c}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(v) for v in r) + "\n")
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Parse output of :func:`to_csv`: ``(config, columns, rows)``."""
    cfg, lines = {}, []
    for line in text.splitlines():
        if line.startswith("# config: "):
            cfg = json.loads(line[len("# config: "):])
        elif not line.startswith("#") and line:
            lines.append(line.split(","))
    return cfg, lines[0], lines[1:]


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def to_json(columns: list[str], rows, cfg: RunConfig | None = None,
            extra: dict | None = None) -> str:
    from . import __version__

    meta = {"version": __version__}
    if cfg is not None:
        meta["config"] = cfg.record()
        meta["config_sha256"] = cfg.digest()
    doc = {"meta": meta, "columns": columns,
           "rows": [[_jsonable(x) for x in r] for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_text(text: str, path: str | None, stream=None):
    if path is None or path == "-":
        stream.write(text)
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
