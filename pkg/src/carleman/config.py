"""Run configuration: INI files with [family], [schedule], [grid], [verify]
and an optional [output] section."""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import MalformedConfig

MAX_ORDER = 6


@dataclass(frozen=True)
class RunConfig:
    # [family]
    preset: str | None = None
    matrix_file: str | None = None
    N: int | None = None
    R: int | None = None
    family_seed: int = 0
    # [schedule]
    rule_target: float = 0.95
    e_cap: int | None = None
    geometric_target: float = 2.0 ** -10
    x_target: float = 0.95
    x_scale: str | float = 64.0
    shell_budget: int = 4096
    drop_tol: float = 1e-12
    # [grid]
    extent: float = 12.0
    step: float = 0.05
    orders: int = 2
    quadrature_nodes: int = 256
    # [verify]
    seed: int = 0
    test_functions: int = 8
    schwarz_samples: int = 1000
    representation_tol: float = 1e-2
    smoothness_tol: float = 1e-3
    margin_fraction: float = 0.1
    nested_extents: tuple = (6.0, 8.0, 12.0)
    gram_children: int = 32
    # [output]
    out_dir: str = "out"
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        validate(self)

    def family_spec(self):
        return {"preset": self.preset, "matrix_file": self.matrix_file, "N": self.N,
                "R": self.R, "seed": self.family_seed}

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        if "seed" in kw:
            kw.setdefault("family_seed", kw["seed"])
        return replace(self, **kw)

    def to_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "base_dir"}
        out["nested_extents"] = list(self.nested_extents)
        return out


def validate(cfg: RunConfig):
    if bool(cfg.preset) == bool(cfg.matrix_file):
        raise MalformedConfig("[family] needs exactly one of 'preset' or 'matrix_file'")
    for name in ("N", "R"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise MalformedConfig(f"{name} must be positive")
    for name in ("rule_target", "geometric_target", "x_target"):
        v = getattr(cfg, name)
        if not 0 < v < 1:
            raise MalformedConfig(f"{name} must lie in (0, 1), got {v}")
    positive = ("extent", "step", "quadrature_nodes", "shell_budget", "drop_tol",
                "test_functions", "schwarz_samples", "representation_tol", "smoothness_tol",
                "margin_fraction", "gram_children")
    for name in positive:
        if not getattr(cfg, name) > 0:
            raise MalformedConfig(f"{name} must be positive")
    if cfg.orders < 0 or cfg.orders > MAX_ORDER:
        raise MalformedConfig(f"orders must lie in 0..{MAX_ORDER}, got {cfg.orders}")
    if cfg.e_cap is not None and cfg.e_cap < 1:
        raise MalformedConfig("e_cap must be positive")
    if cfg.x_scale != "auto" and not float(cfg.x_scale) > 0:
        raise MalformedConfig("x_scale must be 'auto' or a positive number")
    n = cfg.extent / cfg.step
    if abs(n - round(n)) > 1e-9:
        raise MalformedConfig("grid extent must be a whole number of steps")
    if cfg.family_seed < 0 or cfg.seed < 0:
        raise MalformedConfig("seeds must be non-negative")


_SCHEMA = {
    "family": {"preset": str, "matrix_file": str, "N": int, "R": int, "seed": int},
    "schedule": {"rule_target": float, "e_cap": int, "geometric_target": float,
                 "x_target": float, "x_scale": str, "shell_budget": int, "drop_tol": float},
    "grid": {"extent": float, "step": float, "orders": int, "quadrature_nodes": int},
    "verify": {"seed": int, "test_functions": int, "schwarz_samples": int,
               "representation_tol": float, "smoothness_tol": float,
               "margin_fraction": float, "nested_extents": str, "gram_children": int},
    "output": {"dir": str},
}
_RENAME = {("family", "seed"): "family_seed", ("output", "dir"): "out_dir"}


def parse_config(text: str, base_dir=".") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise MalformedConfig(f"unreadable config: {exc}") from exc
    if "family" not in parser:
        raise MalformedConfig("missing [family] section")
    kw = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise MalformedConfig(f"unknown section [{section}]")
        for key, raw in parser[section].items():
            kind = _SCHEMA[section].get(key)
            if kind is None:
                raise MalformedConfig(f"unknown key '{key}' in [{section}]")
            try:
                value = kind(raw.strip())
            except ValueError as exc:
                raise MalformedConfig(f"[{section}] {key} = {raw!r} is not a {kind.__name__}") \
                    from exc
            kw[_RENAME.get((section, key), key)] = value
    if "nested_extents" in kw:
        try:
            kw["nested_extents"] = tuple(float(x) for x in kw["nested_extents"].split(","))
        except ValueError as exc:
            raise MalformedConfig("nested_extents must be a comma-separated list") from exc
    if "x_scale" in kw and kw["x_scale"] != "auto":
        try:
            kw["x_scale"] = float(kw["x_scale"])
        except ValueError as exc:
            raise MalformedConfig("x_scale must be 'auto' or a number") from exc
    return RunConfig(base_dir=str(base_dir), **kw)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedConfig(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)
