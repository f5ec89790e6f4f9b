"""Plain-text run configuration: ``[section]`` headers, ``key = value`` lines, ``#`` comments.

Keys may also appear before any header; every key has a single home section
and a default, listed in :data:`SCHEMA`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .discrete import Boundary, DensityField, Grid, make_grid, read_field_csv
from .errors import (ConfigRegimeError, ConfigSemanticError, ConfigSyntaxError, DegenerateLame,
                     DomainError, ExtinctionRegime, UnsupportedRegime)
from .exact import critical_exponent, make_barenblatt
from .viscosity import ViscosityLaw, make_power_law

__all__ = ["RunConfig", "SCHEMA", "COMMANDS", "INITIAL_KINDS", "parse_config", "load_config"]

COMMANDS = ("exponents", "pme", "cns", "sweep", "verify")
INITIAL_KINDS = ("barenblatt", "gaussian", "box", "extinction", "file")


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _str(text: str) -> str:
    return text


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(_float(t) for t in text.split(",") if t.strip())


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(_int(t) for t in text.split(",") if t.strip())


# key -> (section, parser, default)
SCHEMA: Dict[str, Tuple[str, object, object]] = {
    "command": ("run", _str, None),
    "out": ("run", _str, "out"),
    "workers": ("run", _int, 0),
    "mu_c": ("law", _float, 0.5),
    "alpha": ("law", _float, 2.0),
    "dim": ("law", _int, 1),
    "n": ("grid", _ints, (512,)),
    "a": ("grid", _float, -12.0),
    "b": ("grid", _float, 12.0),
    "boundary": ("grid", _str, "zeroflux"),
    "kind": ("initial", _str, "barenblatt"),
    "t0": ("initial", _float, 1.0),
    "mass": ("initial", _float, None),
    "C": ("initial", _float, 1.0),
    "height": ("initial", _float, 2.0),
    "width": ("initial", _float, 0.25),
    "center": ("initial", _float, 0.0),
    "extinction_time": ("initial", _float, 1.0),
    "path": ("initial", _str, None),
    "t_end": ("time", _float, None),
    "cfl": ("time", _float, 0.5),
    "snapshot_times": ("time", _floats, ()),
    "eps": ("pressure", _float, 0.0),
    "eps_list": ("pressure", _floats, ()),
    "pressure_a": ("pressure", _float, 1.0),
    "gamma": ("pressure", _float, 2.0),
    "mass_drift": ("tolerances", _float, 1e-10),
    "min_density": ("tolerances", _float, -1e-15),
    "entropy_slack": ("tolerances", _float, 1e-6),
}

SECTIONS = tuple(dict.fromkeys(sec for sec, _, _ in SCHEMA.values()))


@dataclass
class RunConfig:
    command: str
    values: Dict[str, object]
    lines: Dict[str, int]

    def __getattr__(self, key):
        values = self.__dict__.get("values", {})
        if key in values:
            return values[key]
        raise AttributeError(key)

    def law(self) -> ViscosityLaw:
        return make_power_law(self.mu_c, self.alpha, self.dim)

    def grid(self) -> Grid:
        n = self.n if len(self.n) == self.dim else self.n * self.dim
        return make_grid(n, self.a, self.b, self.boundary)

    @property
    def start_time(self) -> float:
        return 0.0 if self.kind in ("box", "file") else self.t0

    def initial_field(self, grid: Optional[Grid] = None) -> DensityField:
        grid = grid or self.grid()
        kind = self.kind
        center = [self.center] * grid.dim
        if kind == "box":
            x = grid.centers()
            inside = np.ones(grid.shape, dtype=bool)
            for c, c0 in zip(x, center):
                inside &= np.abs(c - c0) < self.width
            return DensityField(grid, np.where(inside, self.height, 0.0), 0.0)
        if kind == "file":
            return read_field_csv(self.path, grid)
        if kind == "extinction":
            raise UnsupportedRegime("extinction data is singular at the origin and cannot seed a run")
        if kind == "gaussian":
            sol = make_barenblatt(1.0, grid.dim, self.mu_c, mass=self.mass or 1.0)
        elif self.mass is not None:
            sol = make_barenblatt(self.alpha, grid.dim, self.mu_c, mass=self.mass)
        else:
            sol = make_barenblatt(self.alpha, grid.dim, self.mu_c, C=self.C)
        return sol.sample(grid, self.t0, center)

    def reference(self):
        """Exact solution matching the initial data, when there is one."""
        if self.kind == "gaussian":
            return make_barenblatt(1.0, self.dim, self.mu_c, mass=self.mass or 1.0)
        if self.kind == "barenblatt":
            if self.mass is not None:
                return make_barenblatt(self.alpha, self.dim, self.mu_c, mass=self.mass)
            return make_barenblatt(self.alpha, self.dim, self.mu_c, C=self.C)
        return None

    def as_text(self) -> str:
        """Canonical rendering with defaults filled, grouped by section; parses back."""
        out = []
        for sec in SECTIONS:
            out.append(f"[{sec}]")
            for key, (home, _, _) in SCHEMA.items():
                if home != sec:
                    continue
                v = self.values[key]
                if v is None or v == ():
                    continue
                if isinstance(v, tuple):
                    v = ", ".join(repr(x) for x in v)
                out.append(f"{key} = {v}")
        return "\n".join(out) + "\n"


def parse_config(text: str, command: Optional[str] = None) -> RunConfig:
    """Parse and validate configuration text; ``command`` overrides the file's."""
    raw: Dict[str, Tuple[str, int]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("["):
            if not body.endswith("]"):
                raise ConfigSyntaxError("unterminated section header", line=lineno)
            section = body[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigSyntaxError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in body:
            raise ConfigSyntaxError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigSyntaxError(f"unknown key {key!r}", line=lineno, key=key)
        home = SCHEMA[key][0]
        if section is not None and section != home:
            raise ConfigSyntaxError(f"key {key!r} belongs in [{home}], not [{section}]", line=lineno, key=key)
        if key in raw:
            first = raw[key][1]
            raise ConfigSyntaxError(f"duplicate key {key!r} (first set on line {first}, again on line {lineno})",
                                    line=lineno, key=key)
        if value == "":
            raise ConfigSyntaxError(f"empty value for {key!r}", line=lineno, key=key)
        raw[key] = (value, lineno)

    values: Dict[str, object] = {}
    lines: Dict[str, int] = {}
    for key, (_, parser, default) in SCHEMA.items():
        if key in raw:
            text_value, lineno = raw[key]
            try:
                values[key] = parser(text_value)
            except ValueError as exc:
                raise ConfigSyntaxError(f"bad value {text_value!r} for {key!r}: {exc}",
                                        line=lineno, key=key) from None
            lines[key] = lineno
        else:
            values[key] = default
    if command is not None:
        values["command"] = command
    cfg = RunConfig(values["command"], values, lines)
    _validate(cfg)
    return cfg


def load_config(path, command: Optional[str] = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigSemanticError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, command)


def _fail(cfg: RunConfig, key: str, message: str, cause=None, cls=ConfigSemanticError):
    raise cls(f"{key}: {message}", key=key, line=cfg.lines.get(key), cause=cause)


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    if v["command"] is None:
        _fail(cfg, "command", "missing (one of " + ", ".join(COMMANDS) + ")")
    if v["command"] not in COMMANDS:
        _fail(cfg, "command", f"unknown command {v['command']!r}")
    if not v["mu_c"] > 0.0:
        _fail(cfg, "mu_c", "must be positive")
    if not v["alpha"] > 0.0:
        _fail(cfg, "alpha", "must be positive")
    if v["dim"] not in (1, 2, 3):
        _fail(cfg, "dim", "must be 1, 2 or 3")
    if v["kind"] not in INITIAL_KINDS:
        _fail(cfg, "kind", "must be one of " + ", ".join(INITIAL_KINDS))
    command = v["command"]
    if command in ("exponents", "verify"):
        return

    mc = critical_exponent(v["dim"])
    if command == "pme" and not v["alpha"] > mc:
        cause = ExtinctionRegime(f"alpha = {v['alpha']} <= m_c = {mc:.6g} for dim = {v['dim']}")
        _fail(cfg, "alpha", str(cause), cause, ConfigRegimeError)
    try:
        cfg.law()
    except DegenerateLame as exc:
        _fail(cfg, "alpha", str(exc), exc)
    if v["kind"] == "extinction":
        if not 0.0 < v["alpha"] < mc:
            _fail(cfg, "kind", f"extinction data needs 0 < alpha < m_c = {mc:.6g}")
        if not v["t0"] < v["extinction_time"]:
            _fail(cfg, "t0", "extinction data must start before the extinction time")
    if v["kind"] == "file" and not v["path"]:
        _fail(cfg, "path", "required for kind = file")
    if v["kind"] == "gaussian" and v["alpha"] != 1.0:
        _fail(cfg, "kind", "gaussian data is the heat kernel and needs alpha = 1")
    if v["kind"] in ("barenblatt", "gaussian", "extinction") and not v["t0"] > 0.0:
        _fail(cfg, "t0", "exact-solution data must be sampled at a positive time")
    if v["mass"] is not None and not v["mass"] > 0.0:
        _fail(cfg, "mass", "must be positive")
    if not (v["height"] > 0.0 and v["width"] > 0.0):
        _fail(cfg, "height" if not v["height"] > 0.0 else "width", "must be positive")

    if v["dim"] == 3:
        _fail(cfg, "dim", "the solvers run on 1D and 2D grids")
    if len(v["n"]) not in (1, v["dim"]):
        _fail(cfg, "n", f"give one cell count or {v['dim']}")
    if any(k < 8 for k in v["n"]):
        _fail(cfg, "n", "need at least 8 cells per axis")
    if not v["b"] > v["a"]:
        _fail(cfg, "b", "must exceed a")
    try:
        Boundary.parse(v["boundary"])
    except DomainError as exc:
        _fail(cfg, "boundary", str(exc), exc)

    if v["t_end"] is None:
        _fail(cfg, "t_end", "required")
    if not v["t_end"] > cfg.start_time:
        _fail(cfg, "t_end", f"must exceed the initial time {cfg.start_time}")
    if not 0.0 < v["cfl"] <= 1.0:
        _fail(cfg, "cfl", "must lie in (0, 1]")
    snaps = v["snapshot_times"]
    if any(b <= a for a, b in zip(snaps, snaps[1:])):
        _fail(cfg, "snapshot_times", "must be strictly increasing")
    if snaps and (snaps[0] < cfg.start_time or snaps[-1] > v["t_end"]):
        _fail(cfg, "snapshot_times", f"must lie in [{cfg.start_time}, t_end]")

    if command in ("cns", "sweep"):
        if v["dim"] != 1:
            _fail(cfg, "dim", "the Navier-Stokes solver is one-dimensional")
        if not v["gamma"] > 1.0:
            _fail(cfg, "gamma", "must exceed 1")
        if not v["pressure_a"] > 0.0:
            _fail(cfg, "pressure_a", "must be positive")
        if not v["eps"] >= 0.0:
            _fail(cfg, "eps", "must be nonnegative")
    if command == "sweep":
        eps = v["eps_list"]
        if not eps:
            _fail(cfg, "eps_list", "required for sweep")
        if any(e < 0.0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            _fail(cfg, "eps_list", "must be nonnegative and strictly decreasing")
