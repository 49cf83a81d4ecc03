"""Experiment configuration read from INI files.

Every section and key is declared in ``SCHEMA``; anything else is rejected
with its ``section.key`` path. Values are validated when the file is loaded.

Grammar (all keys optional unless the problem kind needs them)::

    [problem]     kind = isotropic-circle | anisotropic-circle | anisotropic-triangle | desk | custom
    [background]  rho, lam, mu  or  rho, c_p, c_s
    [inclusion]   rho, c11, c12, c13, c22, c23, c33  or  rho, lam, mu
    [geometry]    radius; obstacles = a1 a2 alpha0 alpha1 ... ; a1 a2 ...
    [wave]        frequencies = w1, w2; directions = angles in radians; polarization = c_p, c_s
    [mesh]        h; levels
    [dtn]         n_modes; case = 1 | 2 | 3; n_max; draws
    [inversion]   order, iterations, step_factor, n_meas, initial_centers = x y ; x y,
                  initial_radius, method, noise, refine_factor, extra_modes, backtrack
    [output]      far_angles
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from . import inverse as inv
from .material import EllipticityError, IsotropicBackground, StiffnessTensor2D, isotropic_stiffness
from .mesh import GeometryError, StarCurve, validate_curves
from .validation import ValidationProblem, example_anisotropic, example_isotropic

VALIDATION_KINDS = ("isotropic-circle", "anisotropic-circle", "anisotropic-triangle")
KINDS = VALIDATION_KINDS + ("desk", "custom")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _positive(s):
    v = _float(s)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _int(s):
    return int(s)


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise ValueError("must be non-negative")
    return v


def _pos_int(s):
    v = int(s)
    if v <= 0:
        raise ValueError("must be positive")
    return v


def _floats(s):
    vals = [_float(t) for t in s.replace(",", " ").split()]
    if not vals:
        raise ValueError("empty list")
    return tuple(vals)


def _groups(s):
    groups = tuple(_floats(g) for g in s.split(";") if g.strip())
    if not groups:
        raise ValueError("empty list")
    return groups


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s

    return parse


def _bool(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


SCHEMA = {
    "problem": {"kind": _choice(*KINDS)},
    "background": {"rho": _positive, "lam": _float, "mu": _positive, "c_p": _positive, "c_s": _positive},
    "inclusion": {k: _float for k in ("c11", "c12", "c13", "c22", "c23", "c33", "lam", "mu")} | {"rho": _positive},
    "geometry": {"radius": _positive, "obstacles": _groups},
    "wave": {"frequencies": _floats, "directions": _floats, "polarization": _floats},
    "mesh": {"h": _positive, "levels": _pos_int},
    "dtn": {"n_modes": _nonneg_int, "case": _choice("1", "2", "3"), "n_max": _nonneg_int, "draws": _pos_int},
    "inversion": {
        "order": _nonneg_int,
        "iterations": _pos_int,
        "step_factor": _positive,
        "n_meas": _pos_int,
        "initial_centers": _groups,
        "initial_radius": _positive,
        "method": _choice("transmission", "domain"),
        "noise": _float,
        "refine_factor": _positive,
        "extra_modes": _nonneg_int,
        "backtrack": _bool,
    },
    "output": {"far_angles": _pos_int},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated values, keyed ``section.key``."""

    values: dict = field(default_factory=dict)

    def get(self, path, default=None):
        return self.values.get(path, default)

    @property
    def kind(self):
        return self.values.get("problem.kind", "isotropic-circle")

    def with_values(self, **updates):
        v = dict(self.values)
        v.update({k.replace("__", "."): x for k, x in updates.items()})
        return ExperimentConfig(v)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from exc
    values = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(sec, "unknown section")
        for key, raw in cp.items(sec):
            path = f"{sec}.{key}"
            if key not in SCHEMA[sec]:
                raise ConfigError(path, "unknown key")
            try:
                values[path] = SCHEMA[sec][key](raw.strip())
            except ValueError as exc:
                raise ConfigError(path, f"{exc} (got {raw.strip()!r})") from exc
    cfg = ExperimentConfig(values)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------- builders


def frequencies(cfg: ExperimentConfig):
    default = (5000.0, 6000.0) if cfg.kind == "desk" else (1.0, 3.0)
    w = cfg.get("wave.frequencies", default)
    if any(x <= 0 for x in w):
        raise ConfigError("wave.frequencies", "frequencies must be positive")
    if list(w) != sorted(w):
        raise ConfigError("wave.frequencies", "frequencies must be ascending")
    return tuple(w)


def directions(cfg: ExperimentConfig):
    default = tuple(np.pi / 4 + np.pi / 2 * np.arange(4)) if cfg.kind == "desk" else (0.0,)
    return tuple(cfg.get("wave.directions", default))


def background(cfg: ExperimentConfig) -> IsotropicBackground:
    if cfg.kind == "desk":
        return inv.desk_scenario().background
    if cfg.kind in VALIDATION_KINDS:
        return IsotropicBackground(1.0, 2.0, 1.0)
    rho = cfg.get("background.rho")
    if rho is None:
        raise ConfigError("background.rho", "required for custom problems")
    if "background.c_p" in cfg.values or "background.c_s" in cfg.values:
        if "background.lam" in cfg.values or "background.mu" in cfg.values:
            raise ConfigError("background", "give either lam/mu or c_p/c_s, not both")
        try:
            return IsotropicBackground.from_velocities(rho, cfg.get("background.c_p"), cfg.get("background.c_s"))
        except (TypeError, ValueError) as exc:
            raise ConfigError("background.c_p", str(exc)) from exc
    try:
        return IsotropicBackground(cfg.get("background.lam"), cfg.get("background.mu"), rho)
    except (TypeError, ValueError) as exc:
        raise ConfigError("background.lam", f"lam and mu required ({exc})") from exc


def inclusion(cfg: ExperimentConfig) -> StiffnessTensor2D:
    if cfg.kind == "desk":
        return inv.desk_scenario().inclusions[0]
    rho = cfg.get("inclusion.rho")
    if rho is None:
        raise ConfigError("inclusion.rho", "required for custom problems")
    keys = ("c11", "c12", "c13", "c22", "c23", "c33")
    try:
        if "inclusion.lam" in cfg.values or "inclusion.mu" in cfg.values:
            return isotropic_stiffness(cfg.get("inclusion.lam"), cfg.get("inclusion.mu"), rho)
        missing = [k for k in keys if f"inclusion.{k}" not in cfg.values]
        if missing:
            raise ConfigError(f"inclusion.{missing[0]}", "required for custom problems")
        return StiffnessTensor2D.from_constants(*(cfg.get(f"inclusion.{k}") for k in keys), rho=rho)
    except (EllipticityError, TypeError) as exc:
        raise ConfigError("inclusion", str(exc)) from exc


def obstacle_curves(cfg: ExperimentConfig):
    if cfg.kind == "desk":
        return inv.desk_truth()
    groups = cfg.get("geometry.obstacles")
    if groups is None:
        raise ConfigError("geometry.obstacles", "required for custom problems")
    curves = []
    for g in groups:
        if len(g) < 3 or len(g) % 2 == 0:
            raise ConfigError("geometry.obstacles", "each obstacle needs a1 a2 alpha0 plus cos/sin pairs")
        curves.append(StarCurve.from_params(np.array(g)))
    return tuple(curves)


def radius(cfg: ExperimentConfig):
    return cfg.get("geometry.radius", 5.0 if cfg.kind == "desk" else None)


def mesh_size(cfg: ExperimentConfig):
    if cfg.kind == "desk":
        return cfg.get("mesh.h", 0.125)
    h = cfg.get("mesh.h")
    if h is None:
        raise ConfigError("mesh.h", "required for custom problems")
    return h


def validation_problem(cfg: ExperimentConfig, omega) -> ValidationProblem:
    kind = cfg.kind
    if kind == "isotropic-circle":
        return example_isotropic(omega)
    if kind == "anisotropic-circle":
        return example_anisotropic(omega, "circle")
    if kind == "anisotropic-triangle":
        return example_anisotropic(omega, "triangle")
    raise ConfigError("problem.kind", f"{kind!r} is not a validation problem")


def scenario(cfg: ExperimentConfig) -> inv.Scenario:
    if cfg.kind in VALIDATION_KINDS:
        raise ConfigError("problem.kind", "scattering needs kind = desk or custom")
    curves = obstacle_curves(cfg)
    incl = inclusion(cfg)
    pol = cfg.get("wave.polarization", (1.0, 0.0))
    if len(pol) != 2:
        raise ConfigError("wave.polarization", "expected two amplitudes c_p, c_s")
    return inv.Scenario(
        background(cfg),
        (incl,) * len(curves),
        radius(cfg),
        frequencies(cfg),
        directions(cfg),
        mesh_size(cfg),
        cfg.get("inversion.n_meas", 64),
        cfg.get("dtn.n_modes"),
        pol,
    )


def validate(cfg: ExperimentConfig):
    """Cross-key checks run at load time."""
    frequencies(cfg)
    if cfg.kind in ("desk", "custom"):
        r = radius(cfg)
        if r is None:
            raise ConfigError("geometry.radius", "required for custom problems")
        curves = obstacle_curves(cfg)
        background(cfg)
        inclusion(cfg)
        h = mesh_size(cfg)
        if not h < r / 4:
            raise ConfigError("mesh.h", f"must be below R/4 = {r / 4:g}")
        try:
            validate_curves(curves, r)
        except GeometryError as exc:
            raise ConfigError("geometry.obstacles", str(exc)) from exc
        centers = cfg.get("inversion.initial_centers")
        if centers is not None:
            if len(centers) != len(curves) or any(len(c) != 2 for c in centers):
                raise ConfigError("inversion.initial_centers", "need one x y pair per obstacle")
    elif "geometry.obstacles" in cfg.values:
        raise ConfigError("geometry.obstacles", "validation problems have fixed geometry")
    noise = cfg.get("inversion.noise", 0.0)
    if noise < 0:
        raise ConfigError("inversion.noise", "must be non-negative")
    return cfg
