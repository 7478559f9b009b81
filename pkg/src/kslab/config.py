"""Run configuration: flat ``key = value`` pairs grouped in ``[section]`` blocks.

Grammar (a strict subset of INI, read with :mod:`configparser`):

* ``[section]`` headers; only the sections listed in ``SCHEMA`` are allowed.
* ``key = value`` lines; keys are case-sensitive and must appear in the
  section's schema. ``#`` and ``;`` start comments, either on their own
  line or after whitespace at the end of a value.
* Numbers are Python float literals, optionally followed by ``pi`` as a
  multiplier (``8pi``, ``-2pi``), or ``*``-separated products of those
  (``0.9*8pi``, ``4*pi``). Integers must be integral.
* Booleans: ``true/false/yes/no/on/off/1/0``. Lists: comma separated.
* ``rho_cap = auto`` means ``rho_cap_factor`` times the initial maximum density.

Every key has a default, so an empty file is a valid configuration.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, fields

from .mathcore import check_dimension
from .solver import Gaussian, Ring, SolverConfig, UniformBall


class ConfigError(ValueError):
    pass


def _factor(s: str) -> float:
    if s.lower().endswith("pi"):
        coeff = s[:-2]
        if coeff in ("", "+"):
            return math.pi
        if coeff == "-":
            return -math.pi
        return float(coeff) * math.pi
    return float(s)


def parse_number(text: str) -> float:
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty value")
    out = 1.0
    for part in s.split("*"):
        out *= _factor(part)
    return out


def parse_int(text: str) -> int:
    x = parse_number(text)
    if x != int(x):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(x)


_BOOLS = {"true": True, "yes": True, "on": True, "1": True,
          "false": False, "no": False, "off": False, "0": False}


def parse_bool(text: str) -> bool:
    try:
        return _BOOLS[text.strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {text!r}") from None


def parse_int_list(text: str) -> tuple:
    return tuple(parse_int(t) for t in text.split(",") if t.strip())


def parse_cap(text: str):
    return None if text.strip().lower() in ("auto", "") else parse_number(text)


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


# section -> key -> (field name, parser)
SCHEMA = {
    "model": {"dim": ("dim", parse_int), "Z": ("Z", parse_number)},
    "profile": {
        "family": ("family", str.strip),
        "mass": ("mass", parse_number),
        "sigma": ("sigma", parse_number),
        "radius": ("radius", parse_number),
        "center": ("center", parse_number),
        "width": ("width", parse_number),
    },
    "grid": {
        "R": ("R", parse_number),
        "n_cells": ("n_cells", parse_int),
        "stretch": ("stretch", parse_number),
    },
    "solver": {
        "t_end": ("t_end", parse_number),
        "cfl": ("cfl", parse_number),
        "dt_min": ("dt_min", parse_number),
        "rho_cap": ("rho_cap", parse_cap),
        "rho_cap_factor": ("rho_cap_factor", parse_number),
        "snapshot_every": ("snapshot_every", parse_number),
    },
    "sweep": {
        "parameter": ("sweep_parameter", str.strip),
        "start": ("sweep_start", parse_number),
        "stop": ("sweep_stop", parse_number),
        "steps": ("sweep_steps", parse_int),
        "scale": ("sweep_scale", parse_number),
        "bisection": ("bisection", parse_bool),
        "bisection_steps": ("bisection_steps", parse_int),
    },
    "verify": {
        "dims": ("verify_dims", parse_int_list),
        "n_tau": ("n_tau", parse_int),
        "n_u": ("n_u", parse_int),
        "bound_scale": ("bound_scale", parse_number),
        "kernel_tol": ("kernel_tol", parse_number),
        "rel_tol": ("rel_tol", parse_number),
        "abs_tol": ("abs_tol", parse_number),
    },
}

FAMILIES = ("gaussian", "ball", "ring")


@dataclass
class RunConfig:
    dim: int = 2
    Z: float = 0.0
    family: str = "gaussian"
    mass: float = 30.0
    sigma: float = 1.0
    radius: float = 1.0
    center: float = 2.0
    width: float = 0.1
    R: float = 8.0
    n_cells: int = 2048
    stretch: float = 1.0
    t_end: float = 10.0
    cfl: float = 0.9
    dt_min: float = 1e-14
    rho_cap: float | None = None
    rho_cap_factor: float = 100.0
    snapshot_every: float = 0.1
    sweep_parameter: str = "mass"
    sweep_start: float = 0.7
    sweep_stop: float = 1.5
    sweep_steps: int = 9
    sweep_scale: float = 8.0 * math.pi
    bisection: bool = False
    bisection_steps: int = 4
    verify_dims: tuple = (2, 3, 4, 5, 6)
    n_tau: int = 512
    n_u: int = 512
    bound_scale: float = 1.0
    kernel_tol: float = 1e-10
    rel_tol: float = 0.05
    abs_tol: float = 1e-8

    def validate(self) -> "RunConfig":
        try:
            check_dimension(self.dim)
        except ValueError as exc:
            raise ConfigError(f"model.dim: {exc}") from None
        if self.family not in FAMILIES:
            raise ConfigError(f"profile.family must be one of {FAMILIES}, got {self.family!r}")
        if self.sweep_parameter not in ("mass", "sigma"):
            raise ConfigError(f"sweep.parameter must be 'mass' or 'sigma', got {self.sweep_parameter!r}")
        if self.sweep_steps < 1:
            raise ConfigError("sweep.steps must be >= 1")
        if self.sweep_start > self.sweep_stop:
            raise ConfigError("sweep.start must not exceed sweep.stop")
        if self.n_tau < 2 or self.n_u < 2:
            raise ConfigError("verify.n_tau and verify.n_u must be >= 2")
        for d in self.verify_dims:
            try:
                check_dimension(d)
            except ValueError as exc:
                raise ConfigError(f"verify.dims: {exc}") from None
        for name in ("mass", "sigma", "radius", "center", "width"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"profile.{name} must be positive")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def solver_config(self, **changes) -> SolverConfig:
        kw = dict(nu=self.dim, Z=self.Z, R=self.R, n_cells=self.n_cells, stretch=self.stretch,
                  t_end=self.t_end, cfl=self.cfl, dt_min=self.dt_min, rho_cap=self.rho_cap,
                  rho_cap_factor=self.rho_cap_factor, snapshot_every=self.snapshot_every)
        kw.update(changes)
        return SolverConfig(**kw)

    def profile_family(self, sigma: float | None = None):
        if self.family == "gaussian":
            return Gaussian(self.sigma if sigma is None else sigma)
        if self.family == "ball":
            return UniformBall(self.radius)
        return Ring(self.center, self.width)

    def to_ini(self) -> str:
        out = io.StringIO()
        for section, keys in SCHEMA.items():
            out.write(f"[{section}]\n")
            for key, (attr, _) in keys.items():
                out.write(f"{key} = {_fmt(getattr(self, attr))}\n")
            out.write("\n")
        return out.getvalue()


def _apply(cfg: RunConfig, section: str, key: str, value: str, origin: str):
    if section not in SCHEMA:
        raise ConfigError(f"{origin}: unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{origin}: unknown key '{key}' in section [{section}]")
    attr, parser = SCHEMA[section][key]
    try:
        setattr(cfg, attr, parser(value))
    except ValueError as exc:
        raise ConfigError(f"{origin}: bad value for {section}.{key}: {exc}") from None


def parse_config_text(text: str, origin: str = "<config>", cfg: RunConfig | None = None) -> RunConfig:
    cfg = RunConfig() if cfg is None else cfg
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    for section in parser.sections():
        for key, value in parser.items(section):
            _apply(cfg, section, key, value, origin)
    return cfg


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (optional), apply ``section.key=value`` overrides, validate."""
    cfg = RunConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            parse_config_text(fh.read(), str(path), cfg)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        _apply(cfg, section, key.strip(), value, "--set")
    return cfg.validate()


def field_names() -> list:
    return [f.name for f in fields(RunConfig)]
