"""Experiment configuration: one flat TOML file per experiment.

Every table maps onto a dataclass below.  Unknown keys, missing required keys
and ill-typed values raise :class:`ConfigError` naming the key and the line
it sits on.
"""

from __future__ import annotations

import dataclasses
import hashlib
import re
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .connectivity import FULL, HORIZONTAL, VERTICAL, BoundarySpec, Mask
from .environment import (EnvironmentSpec, SamplingFunction, TorusPoint, field_spec, golden_environment,
                          uniform_environment)
from .estimation import BoundaryHit, Complement, Connection, VerticalCrossing
from .realization import SpaceTimeBox
from .schedule import ScheduleParams, suggest


class ConfigError(ValueError):
    pass


@dataclass
class ZeroConfig:
    point: list[float]
    exponent: float


@dataclass
class FieldConfig:
    matrix: list[list[float]]
    theta: list[float]
    kind: str = "constant"
    level: float = 1.0
    zeros: list[ZeroConfig] = field(default_factory=list)


@dataclass
class EnvironmentConfig:
    """``preset`` is "golden", "uniform" or "fields" (explicit torus fields)."""

    preset: str = "golden"
    d: int = 1
    kappa: float = 1.0
    zeta: float = 1.0
    sigma: float = 1.0
    # uniform
    delta: float = 1.0
    lam: float = 1.0
    # golden
    exponent: float = 0.9
    death_zero: float = 0.5
    bond_zero: float = 0.5
    theta0: float = 0.0
    theta1: float = 0.0
    level: float = 1.0
    # fields
    fields: list[FieldConfig] = field(default_factory=list)


@dataclass
class ScheduleConfig:
    """``mode = "suggest"`` derives exponents; ``"explicit"`` takes them as given."""

    mode: str = "suggest"
    R: int | None = None
    C: float = 1.0 / 50.0
    C_kappa: float = 0.01
    L_0: int = 10
    mu_0: float = 1.0
    k_max: int = 4
    alpha: float | None = None
    gamma: float | None = None
    eta: float | None = None
    tau: float | None = None
    p: float | None = None
    q: float | None = None
    beta: float | None = None


@dataclass
class QueryConfig:
    """``kind``: "connect" (a <-> b), "boundary" (a -> faces) or "crossing"."""

    kind: str = "connect"
    a_x: list[int] = field(default_factory=list)
    a_t: float = 0.0
    b_x: list[int] = field(default_factory=list)
    b_t: float = 0.0
    faces: str = "all"
    exclude: list[list[int]] = field(default_factory=list)
    t_lo: float | None = None
    t_hi: float | None = None
    complement: bool = False


@dataclass
class RunConfig:
    center: list[int] = field(default_factory=lambda: [0])
    L: int = 2
    T: float = 2.0
    t: float = 0.0
    n_trials: int = 1000
    seed: int = 0
    workers: int = 1
    trial: int = 0
    fit: str = "none"
    scan_L: int = 1000
    scan_center: list[int] | None = None
    epsilon: float | None = None
    query: list[QueryConfig] = field(default_factory=lambda: [QueryConfig("connect", [0], 0.0, [0], 1.0)])


@dataclass
class OutputConfig:
    dir: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv"])


@dataclass
class ExperimentConfig:
    id: str = "experiment"
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_CHOICES = {
    ("environment", "preset"): ("golden", "uniform", "fields"),
    ("schedule", "mode"): ("suggest", "explicit"),
    ("run", "fit"): ("none", "spatial", "temporal"),
    ("query", "kind"): ("connect", "boundary", "crossing"),
    ("query", "faces"): ("all", "vertical", "horizontal", "lower", "upper"),
    ("fields", "kind"): ("constant", "power"),
}


# -- locating keys in the source text ---------------------------------------

_HEADER = re.compile(r"^\s*(\[\[?)\s*([^\]]+?)\s*\]\]?")


def _key_line(text: str, table: tuple, key: str | None) -> int | None:
    """1-based line of ``key`` inside ``table`` (or of the table header itself).

    ``table`` holds names and, for arrays of tables, the element index.
    """
    want = [t for t in table if isinstance(t, str)]
    idx = [t for t in table if isinstance(t, int)]
    seen: dict[str, int] = {}
    current: list[str] = []
    hit = not want
    key_re = re.compile(r'^\s*"?' + re.escape(key) + r'"?\s*=') if key else None
    for n, line in enumerate(text.splitlines(), 1):
        m = _HEADER.match(line)
        if m:
            current = [p.strip().strip('"') for p in m.group(2).split(".")]
            dotted = ".".join(current)
            if m.group(1) == "[[":
                seen[dotted] = seen.get(dotted, -1) + 1
            hit = current == want and (not idx or seen.get(dotted, 0) == idx[-1])
            if hit and key is None:
                return n
            continue
        if hit and key_re is not None and key_re.match(line):
            return n
    return None


# -- typed conversion -------------------------------------------------------

def _fail(msg: str, text: str, table: tuple, key: str | None) -> ConfigError:
    name = "".join(f".{t}" if isinstance(t, str) else f"[{t}]" for t in table).lstrip(".")
    full = f"{name}.{key}" if name and key else (key or name)
    line = _key_line(text, table, key)
    if line is None and key is not None:
        line = _key_line(text, table + (key,), None)
    where = f" (line {line})" if line else ""
    return ConfigError(f"{full}{where}: {msg}")


def _strip_optional(tp):
    if typing.get_origin(tp) in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        return args[0], True
    return tp, False


def _coerce(value, tp, ctx):
    text, table, key = ctx
    tp, optional = _strip_optional(tp)
    origin = typing.get_origin(tp)
    if origin is list:
        (inner,) = typing.get_args(tp)
        if not isinstance(value, list):
            raise _fail(f"expected an array, got {type(value).__name__}", *ctx)
        if dataclasses.is_dataclass(inner):
            return [_build(inner, v, text, table + (key, i)) for i, v in enumerate(value)]
        return [_coerce(v, inner, ctx) for v in value]
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, text, table + (key,))
    if tp is bool:
        if not isinstance(value, bool):
            raise _fail("expected true or false", *ctx)
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _fail(f"expected an integer, got {value!r}", *ctx)
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _fail(f"expected a number, got {value!r}", *ctx)
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise _fail(f"expected a string, got {value!r}", *ctx)
        return value
    raise TypeError(tp)


def _build(cls, data, text: str, table: tuple):
    if not isinstance(data, dict):
        raise _fail("expected a table", text, table, None)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            raise _fail("unknown key", text, table, key)
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], (text, table, f.name))
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise _fail("required key missing", text, table, f.name)
    obj = cls(**kwargs)
    section = next((t for t in reversed(table) if isinstance(t, str)), "")
    for f in dataclasses.fields(cls):
        allowed = _CHOICES.get((section, f.name))
        if allowed and getattr(obj, f.name) not in allowed:
            raise _fail(f"must be one of {', '.join(allowed)}", text, table, f.name)
    return obj


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"malformed config: {e}") from None
    cfg = _build(ExperimentConfig, data, text, ())
    _check(cfg, text)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text)


def _drop_none(obj):
    if isinstance(obj, dict):
        return {k: _drop_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, list):
        return [_drop_none(v) for v in obj]
    return obj


def render_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(_drop_none(dataclasses.asdict(cfg)))


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(render_config(cfg).encode()).hexdigest()


def _check(cfg: ExperimentConfig, text: str = "") -> None:
    """Cross-field checks that the type layer cannot express."""
    env, run = cfg.environment, cfg.run
    if env.d < 1:
        raise _fail("must be at least 1", text, ("environment",), "d")
    if env.preset == "golden" and env.d != 1:
        raise _fail("the golden preset is one-dimensional", text, ("environment",), "d")
    if env.preset == "fields" and len(env.fields) != env.d + 1:
        raise _fail(f"need d + 1 = {env.d + 1} fields", text, ("environment",), "fields")
    if len(run.center) != env.d:
        raise _fail(f"needs {env.d} coordinates", text, ("run",), "center")
    if run.scan_center is not None and len(run.scan_center) != env.d:
        raise _fail(f"needs {env.d} coordinates", text, ("run",), "scan_center")
    for key, val, ok in (("L", run.L, run.L >= 0), ("T", run.T, run.T >= 0),
                         ("n_trials", run.n_trials, run.n_trials >= 1),
                         ("workers", run.workers, run.workers >= 1),
                         ("seed", run.seed, 0 <= run.seed < 2 ** 64),
                         ("trial", run.trial, 0 <= run.trial < 2 ** 64),
                         ("scan_L", run.scan_L, run.scan_L >= 0)):
        if not ok:
            raise _fail(f"value {val!r} out of range", text, ("run",), key)
    for i, q in enumerate(run.query):
        for key in ("a_x", "b_x"):
            need = q.kind == "connect" or (key == "a_x" and q.kind == "boundary")
            if need and len(getattr(q, key)) != env.d:
                raise _fail(f"needs {env.d} coordinates", text, ("run", "query", i), key)
    if cfg.schedule.mode == "explicit":
        for key in ("alpha", "gamma", "eta", "tau", "p", "q", "beta"):
            if getattr(cfg.schedule, key) is None:
                raise _fail("required in explicit mode", text, ("schedule",), key)


# -- building model objects -------------------------------------------------

def build_environment(env: EnvironmentConfig) -> EnvironmentSpec:
    if env.preset == "golden":
        return golden_environment(env.kappa, env.exponent, env.death_zero, env.bond_zero,
                                  env.theta0, env.theta1, env.level, env.sigma, env.zeta)
    if env.preset == "uniform":
        spec = uniform_environment(env.d, env.delta, env.lam, env.kappa)
        return dataclasses.replace(spec, zeta=env.zeta, sigma=env.sigma)
    fields = []
    for f in env.fields:
        if f.kind == "constant":
            h = SamplingFunction.constant(f.level)
        else:
            h = SamplingFunction.power_product([(tuple(z.point), z.exponent) for z in f.zeros], f.level)
        fields.append(field_spec(f.matrix, f.theta, h))
    return EnvironmentSpec(env.d, tuple(fields), env.kappa, env.zeta, env.sigma)


def build_schedule(cfg: ExperimentConfig, spec: EnvironmentSpec) -> ScheduleParams:
    s = cfg.schedule
    R = s.R if s.R is not None else spec.R
    common = dict(C=s.C, mu_0=s.mu_0, L_0=s.L_0, C_kappa=s.C_kappa, R_v=spec.R_v, R_e=spec.R_e)
    if s.mode == "suggest":
        return suggest(spec.d, spec.nu, spec.zeta, spec.sigma, R, **common)
    return ScheduleParams(spec.d, spec.nu, spec.zeta, spec.sigma, R, s.alpha, s.gamma, s.eta, s.tau,
                          s.p, s.q, s.beta, **common)


def build_box(run: RunConfig) -> SpaceTimeBox:
    return SpaceTimeBox.around(tuple(run.center), run.L, run.T, run.t)


_FACES = {"all": BoundarySpec(), "vertical": VERTICAL, "horizontal": HORIZONTAL,
          "lower": BoundarySpec(True, False, False), "upper": BoundarySpec(False, True, False)}


def build_event(q: QueryConfig):
    mask = Mask(frozenset(tuple(v) for v in q.exclude), q.t_lo, q.t_hi) if (
        q.exclude or q.t_lo is not None or q.t_hi is not None) else FULL
    if q.kind == "connect":
        ev = Connection((q.a_x, q.a_t), (q.b_x, q.b_t), mask)
    elif q.kind == "boundary":
        ev = BoundaryHit((q.a_x, q.a_t), _FACES[q.faces], mask)
    else:
        ev = VerticalCrossing(mask)
    return Complement(ev) if q.complement else ev


def query_coordinates(q: QueryConfig) -> tuple[float | None, float | None]:
    """Spatial l1 separation and time gap of a connection query."""
    if q.kind != "connect":
        return None, None
    r = sum(abs(a - b) for a, b in zip(q.a_x, q.b_x))
    return float(r), abs(q.b_t - q.a_t)


def defaults_help() -> str:
    return render_config(ExperimentConfig())


__all__ = ["ConfigError", "ExperimentConfig", "EnvironmentConfig", "FieldConfig", "ZeroConfig",
           "ScheduleConfig", "RunConfig", "QueryConfig", "OutputConfig", "parse_config", "load_config",
           "render_config", "config_hash", "build_environment", "build_schedule", "build_box",
           "build_event", "query_coordinates", "defaults_help", "TorusPoint"]
