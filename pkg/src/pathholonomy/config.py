"""Experiment configuration: schema validation and object construction."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .catalog import build_connection, build_two_form
from .fields import AdjointForm, zero_form
from .geom import Path, Square, boundary_loop, build_square, circle_path, line_path, lissajous_loop
from .liealg import GroupSpec, make_group


class ConfigError(ValueError):
    """Schema violation or an inconsistent configuration."""


def load_schema() -> dict:
    text = resources.files("pathholonomy").joinpath("schema/experiment.schema.json").read_text()
    return json.loads(text)


def validate(config: dict) -> dict:
    try:
        jsonschema.validate(config, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    return config


def load(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from None
    return validate(cfg)


def apply_overrides(config: dict, steps_s=None, steps_t=None, seed=None) -> dict:
    """Command-line overrides: a single grid level and/or the auxiliary seed."""
    cfg = copy.deepcopy(config)
    if steps_s is not None or steps_t is not None:
        base = cfg["grids"][-1]
        cfg["grids"] = [[steps_s or base[0], steps_t or base[1]]]
    if seed is not None:
        cfg["seed"] = int(seed)
    return validate(cfg)


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def build_path(entry: dict, d: int) -> Path:
    kind = entry["kind"]
    if kind == "circle":
        return circle_path(np.asarray(entry.get("center", np.zeros(d)), float),
                           entry.get("radius", 0.5), d, tuple(entry.get("axes", (0, 1))))
    if kind == "lissajous":
        return lissajous_loop(d, int(entry.get("seed", 0)), entry.get("amplitude", 0.5),
                              entry.get("modes", 2))
    if kind == "line":
        return line_path(np.asarray(entry["a"], float), np.asarray(entry["b"], float))
    if kind == "boundary":
        return boundary_loop(build_square(entry.get("square", {"kind": "planar"}), d))
    raise ConfigError(f"unknown path kind {kind!r}")


@dataclass
class Setup:
    """Objects built from a configuration."""

    config: dict
    spec: GroupSpec
    dim: int
    A: AdjointForm
    B: AdjointForm
    eta: AdjointForm | None
    beta: AdjointForm | None
    path: Path | None
    square: Square | None

    @property
    def grids(self):
        return [tuple(g) for g in self.config["grids"]]

    @property
    def options(self) -> dict:
        return self.config.get("options", {})

    @property
    def seed(self) -> int:
        return int(self.config.get("seed", 0))

    def tol(self, key, default):
        return float(self.config.get("tolerances", {}).get(key, default))


def build(config: dict) -> Setup:
    cfg = validate(config)
    g = cfg["group"]
    try:
        spec = make_group(g["family"], g.get("N"), g.get("cartan"))
    except ValueError as exc:
        raise ConfigError(f"group: {exc}") from None
    d = int(cfg["dim"])
    try:
        A = build_connection(cfg.get("connection", {"family": "zero"}), spec, d)
        B = build_two_form(cfg.get("two_form", {"family": "zero"}), spec, d, A)
        eta = _one_form(cfg.get("eta"), spec, d)
        beta = None
        if "beta" in cfg:
            beta = build_two_form(cfg["beta"], spec, d, A)
        path = build_path(cfg["path"], d) if "path" in cfg else None
        square = build_square(cfg["square"], d) if "square" in cfg else None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Setup(cfg, spec, d, A, B, eta, beta, path, square)


def _one_form(entry, spec, d):
    if entry is None:
        return None
    if entry.get("family") == "zero":
        return zero_form(1, d, spec.N)
    return build_connection(entry, spec, d)
