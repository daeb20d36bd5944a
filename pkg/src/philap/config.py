"""Flat ``dotted.key = value`` problem configuration.

Values are typed by a key schema, so parsing and the canonical text form
round-trip exactly (floats are written with ``repr``).  Lines starting with
``#`` are comments.

Example::

    phi.family = power
    phi.p = 2
    phi.n = 2
    potential.term.0.kind = quadratic
    potential.term.1.kind = linear
    potential.term.1.coef = cos(t)
    potential.term.1.vector = 1, 0
    problem.period = 2*pi
    problem.nodes = 256
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import clarke
from .expr import ExpressionError, TimeExpr
from .gfunc import GFunction, make_family
from .solver import DiscreteProblem, SolverOptions


class ConfigError(ValueError):
    pass


# --- value types

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _matrix(text: str) -> list[list[float]]:
    return [_floats(row) for row in text.split(";") if row.strip()]


def _expr(text: str) -> str:
    TimeExpr(text)  # validate
    return text.strip()


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        if value and isinstance(value[0], list):
            return "; ".join(_fmt(row) for row in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


_GFUNC_KEYS = {"family": str, "p": float, "n": int, "ps": _floats, "dims": _ints, "scale": float}
_TERM_KEYS = {"kind": str, "coef": _expr, "vector": _floats, "index": int, "exponent": float,
              "i": int, "j": int, "block": _ints, "slopes": _matrix, "offsets": _floats}
_SOLVER_TYPES = {f.name: (_bool if f.type in ("bool", bool) else
                          int if f.type in ("int", int) else float)
                 for f in dataclasses.fields(SolverOptions)}
_SIMPLE_KEYS = {
    "name": str,
    "potential.dimension": int,
    "problem.period": _expr,
    "problem.nodes": int,
    "probes.d": _expr,
    "probes.b": _expr,
    "probes.lambda": float,
    "probes.mu": float,
    "probes.pasca.p": float,
    "probes.pasca.q": float,
    "probes.pasca.alphas": _floats,
    "probes.seed": int,
    "probes.h9_pairs": int,
    "analysis.radius": float,
    "analysis.samples": int,
}

TERM_KINDS = ("quadratic", "linear", "gfunc", "power_coord", "product", "exp_norm", "constant",
              "abs_norm", "max_affine")


def _key_type(key: str):
    if key in _SIMPLE_KEYS:
        return _SIMPLE_KEYS[key]
    m = re.fullmatch(r"(phi|probes\.phi0)\.(\w+)", key)
    if m and m.group(2) in _GFUNC_KEYS:
        return _GFUNC_KEYS[m.group(2)]
    m = re.fullmatch(r"potential\.term\.(\d+)\.gfunc\.(\w+)", key)
    if m and m.group(2) in _GFUNC_KEYS:
        return _GFUNC_KEYS[m.group(2)]
    m = re.fullmatch(r"potential\.term\.(\d+)\.(\w+)", key)
    if m and m.group(2) in _TERM_KEYS:
        return _TERM_KEYS[m.group(2)]
    m = re.fullmatch(r"solver\.(\w+)", key)
    if m and m.group(1) in _SOLVER_TYPES:
        return _SOLVER_TYPES[m.group(1)]
    raise ConfigError(f"unknown config key {key!r}")


def _sort_key(key: str):
    return [(0, int(p), "") if p.isdigit() else (1, 0, p) for p in key.split(".")]


@dataclass
class ProblemConfig:
    """Typed key/value view of a configuration file."""

    values: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "ProblemConfig":
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            typ = _key_type(key)
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = typ(val)
            except (ValueError, ExpressionError) as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        return cls(values)

    @classmethod
    def load(cls, path) -> "ProblemConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.parse(text)

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(self.values[k])}\n" for k in sorted(self.values, key=_sort_key))

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def with_values(self, **updates) -> "ProblemConfig":
        vals = dict(self.values)
        for k, v in updates.items():
            vals[k.replace("__", ".")] = v
        return ProblemConfig(vals)

    def section(self, prefix: str) -> dict:
        n = len(prefix) + 1
        return {k[n:]: v for k, v in self.values.items() if k.startswith(prefix + ".")}

    # --- typed views

    @property
    def phi_descriptor(self) -> dict:
        return self.section("phi")

    @property
    def period(self) -> float:
        return float(TimeExpr(self.values.get("problem.period", "2*pi"))(0.0))

    @property
    def nodes(self) -> int:
        return int(self.values.get("problem.nodes", 256))

    @property
    def term_indices(self) -> list[int]:
        idx = {int(k.split(".")[2]) for k in self.values if k.startswith("potential.term.")}
        return sorted(idx)

    @property
    def solver_options(self) -> SolverOptions:
        try:
            return SolverOptions(**self.section("solver"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def build_gfunction(desc: dict, where: str) -> GFunction:
    if "family" not in desc:
        raise ConfigError(f"{where}.family is required")
    try:
        return make_family(dict(desc))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_phi(cfg: ProblemConfig) -> GFunction:
    return build_gfunction(cfg.phi_descriptor, "phi")


def _spatial(kind: str, params: dict, n: int, where: str):
    try:
        if kind == "quadratic":
            return clarke.quadratic(n)
        if kind == "linear":
            vec = params["vector"]
            if len(vec) != n:
                raise ConfigError(f"{where}.vector has length {len(vec)}, expected {n}")
            return clarke.linear(vec)
        if kind == "gfunc":
            g = build_gfunction({k[6:]: v for k, v in params.items() if k.startswith("gfunc.")},
                                f"{where}.gfunc")
            if g.dimension != n:
                raise ConfigError(f"{where}.gfunc acts on R^{g.dimension}, expected R^{n}")
            return clarke.gfunc_term(g)
        if kind == "power_coord":
            return clarke.power_coord(params["index"], params["exponent"], n)
        if kind == "product":
            return clarke.product(params["i"], params["j"], n)
        if kind == "exp_norm":
            return clarke.exp_norm(n)
        if kind == "constant":
            return clarke.constant_one(n)
        if kind == "abs_norm":
            block = tuple(params.get("block", list(range(n))))
            if not block or min(block) < 0 or max(block) >= n:
                raise ConfigError(f"{where}.block out of range for R^{n}")
            return clarke.AbsNorm(block)
        if kind == "max_affine":
            slopes = params["slopes"]
            if any(len(row) != n for row in slopes):
                raise ConfigError(f"{where}.slopes rows must have length {n}")
            return clarke.max_affine(slopes, params.get("offsets"))
    except KeyError as exc:
        raise ConfigError(f"{where}: missing parameter {exc.args[0]}") from None
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.kind {kind!r} is not one of {', '.join(TERM_KINDS)}")


def build_potential(cfg: ProblemConfig, dimension: int | None = None) -> clarke.Potential:
    n = cfg.get("potential.dimension", dimension)
    if n is None:
        raise ConfigError("potential.dimension is required when phi is absent")
    if dimension is not None and n != dimension:
        raise ConfigError(f"potential.dimension {n} differs from phi dimension {dimension}")
    terms = []
    for k in cfg.term_indices:
        where = f"potential.term.{k}"
        params = cfg.section(where)
        if "kind" not in params:
            raise ConfigError(f"{where}.kind is required")
        spatial = _spatial(params["kind"], params, n, where)
        terms.append(clarke.Term(TimeExpr(params.get("coef", "1")), spatial))
    try:
        return clarke.Potential(n, tuple(terms), cfg.period)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_problem(cfg: ProblemConfig, nodes: int | None = None, seed: int | None = None) -> DiscreteProblem:
    phi = build_phi(cfg)
    F = build_potential(cfg, phi.dimension)
    opts = cfg.solver_options
    if seed is not None:
        opts = dataclasses.replace(opts, seed=seed)
    try:
        return DiscreteProblem(phi, F, cfg.period, cfg.nodes if nodes is None else nodes, opts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def probe_arguments(cfg: ProblemConfig, seed: int | None = None) -> dict:
    """Keyword arguments for :func:`philap.probes.run_all` from the ``probes`` section."""
    out: dict = {"seed": cfg.get("probes.seed", 0) if seed is None else seed}
    phi0 = cfg.section("probes.phi0")
    if phi0:
        out["phi0"] = build_gfunction(phi0, "probes.phi0")
    for key, name in (("probes.d", "d"), ("probes.b", "b")):
        if key in cfg.values:
            out[name] = TimeExpr(cfg.values[key])
    if "probes.lambda" in cfg.values or "probes.mu" in cfg.values:
        if not ("probes.lambda" in cfg.values and "probes.mu" in cfg.values):
            raise ConfigError("probes.lambda and probes.mu must be given together")
        out["lam"], out["mu"] = cfg.values["probes.lambda"], cfg.values["probes.mu"]
    if "probes.pasca.p" in cfg.values:
        out["pasca"] = {"p": cfg.values["probes.pasca.p"],
                        "q": cfg.get("probes.pasca.q", cfg.values["probes.pasca.p"]),
                        "alphas": tuple(cfg.values["probes.pasca.alphas"])
                        if "probes.pasca.alphas" in cfg.values else None}
    if "probes.h9_pairs" in cfg.values:
        out["h9_pairs"] = cfg.values["probes.h9_pairs"]
    return out


def echo(cfg: ProblemConfig) -> dict:
    return {k: cfg.values[k] for k in sorted(cfg.values, key=_sort_key)}

