"""Experiment configuration in INI format.

Example::

    [run]
    m = 1.0
    resolution = 15
    variant = minimal
    seed = 0

    [family]
    name = standard
    epsilon = 1e-3
    shape = 0.1

    [continuation]
    ds = 0.1
    s_max = 8.0

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .metric import FAMILIES
from .profiles import PROFILES

_FAMILY_KEYS = {
    "background": set(),
    "standard": {"shape"},
    "sphere_block": {"l", "order", "profile"},
    "broken_boundary": set(),
    "cross_term": {"l", "order", "profile"},
}

_SCHEMA = {
    "run": {"m", "resolution", "variant", "seed"},
    "family": {"name", "epsilon", "shape", "l", "order", "profile"},
    "continuation": {"ds", "s_max", "tol", "max_iter", "jacobian"},
    "checks": {"decay_distance", "match_window", "penrose_tol", "monotone_tol"},
    "output": {"dir"},
}


@dataclass
class ExperimentConfig:
    m: float = 1.0
    resolution: int = 15
    variant: str = "minimal"
    seed: int = 0
    family: str = "background"
    epsilon: float = 0.0
    family_params: dict = field(default_factory=dict)
    ds: float = 0.1
    s_max: float = 8.0
    tol: float = 1e-10
    max_iter: int = 12
    jacobian: str = "pointwise"
    decay_distance: bool = False
    match_window: tuple = (3.8, 3.9, 4.0, 4.1, 4.2)
    penrose_tol: float = 1e-6
    monotone_tol: float = 1e-8
    out_dir: str | None = None

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(math.isfinite(self.m) and self.m > 0, f"m must be positive, got {self.m}")
        need(2 <= self.resolution <= 64, f"resolution must lie in [2, 64], got {self.resolution}")
        need(self.variant in ("minimal", "h2"), f"variant must be minimal or h2, got {self.variant!r}")
        need(self.seed >= 0, "seed must be non-negative")
        need(self.family in FAMILIES, f"unknown family {self.family!r}; known: {sorted(FAMILIES)}")
        extra = set(self.family_params) - _FAMILY_KEYS[self.family]
        need(not extra, f"keys {sorted(extra)} do not apply to family {self.family!r}")
        need(math.isfinite(self.epsilon) and abs(self.epsilon) < 0.5,
             f"epsilon must satisfy |epsilon| < 0.5, got {self.epsilon}")
        if self.family == "background":
            need(self.epsilon == 0.0, "the background family takes epsilon = 0")
        prof = self.family_params.get("profile")
        need(prof is None or prof in PROFILES, f"unknown profile {prof!r}")
        l = self.family_params.get("l", 2)
        order = self.family_params.get("order", 0)
        need(isinstance(l, int) and l >= 0 and abs(order) <= l,
             f"harmonic indices need l >= 0 and |order| <= l, got ({l}, {order})")
        need(0.0 <= self.family_params.get("shape", 0.1) <= 1.0, "shape must lie in [0, 1]")
        need(0.0 < self.ds <= 0.2, f"ds must lie in (0, 0.2], got {self.ds}")
        need(self.s_max > self.ds and self.s_max <= 12.0, f"s_max must lie in (ds, 12], got {self.s_max}")
        need(self.tol > 0, "tol must be positive")
        need(self.max_iter >= 1, "max_iter must be >= 1")
        need(self.jacobian in ("pointwise", "basis"), "jacobian must be pointwise or basis")
        need(len(self.match_window) >= 1, "match_window needs at least one point")
        need(self.penrose_tol >= 0 and self.monotone_tol >= 0, "tolerances must be non-negative")
        return self

    def metric(self):
        from .background import BackgroundModel
        from .metric import PerturbedMetric

        kwargs = dict(self.family_params)
        if "order" in kwargs:
            kwargs["m"] = kwargs.pop("order")
        spec = FAMILIES[self.family](epsilon=self.epsilon, **kwargs)
        return PerturbedMetric(BackgroundModel(self.m), spec)

    def settings(self):
        from .solver import SolveSettings

        return SolveSettings(tol=self.tol, max_iter=self.max_iter, jacobian=self.jacobian)

    def as_dict(self):
        d = dict(self.__dict__)
        d["match_window"] = list(self.match_window)
        return d


def _convert(section, key, raw):
    ints = {"resolution", "seed", "max_iter", "l", "order"}
    strs = {"variant", "name", "profile", "jacobian", "dir"}
    try:
        if key in ints:
            return int(raw)
        if key in strs:
            return raw.strip()
        if key == "decay_distance":
            return {"true": True, "yes": True, "1": True, "on": True,
                    "false": False, "no": False, "0": False, "off": False}[raw.strip().lower()]
        if key == "match_window":
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return float(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid value") from None


def parse_config(text, source="<config>"):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            val = _convert(section, key, raw)
            if section == "family":
                if key == "name":
                    cfg.family = val
                elif key == "epsilon":
                    cfg.epsilon = val
                else:
                    cfg.family_params[key] = val
            elif section == "output":
                cfg.out_dir = val
            else:
                setattr(cfg, key, val)
    return cfg.validate()


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))
