"""Run configuration read from JSON.

Keys starting with ``_`` are ignored, which lets shipped configs carry unit
annotations.  ``p`` may be a number, the string ``"inf"``, or a list.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .geometry import (QUAD4, SUPPORT, TRI3, Mesh, generate_lshape_mesh, generate_rect_mesh,
                       load_mesh)
from .optimizer import OptimizerConfig
from .statics import TRIANGLE_RULES

BENCHMARKS = ("lshape", "cantilever")


class ConfigError(ValueError):
    pass


def parse_p(value) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"cannot read exponent {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"cannot read exponent {value!r}")
    p = float(value)
    if not p >= 1.0:
        raise ConfigError(f"exponent must lie in [1, inf], got {p}")
    return p


def parse_p_list(value) -> list[float]:
    if isinstance(value, str) and "," in value:
        value = [v for v in value.split(",") if v.strip()]
    if isinstance(value, (list, tuple)):
        return [parse_p(v) for v in value]
    return [parse_p(value)]


def _strip(d: dict) -> dict:
    return {k: v for k, v in d.items() if not str(k).startswith("_")}


def _number(d: dict, key: str, default=None, positive: bool = True) -> float:
    if key not in d:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{key!r} must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{key!r} must be positive, got {v}")
    return float(v)


@dataclass
class RunConfig:
    """Validated run description.  Defaults: vp, p = 2, E0 = 216554, tri-3."""
    domain: dict
    mesh: dict
    supports: list
    tractions: dict
    point_forces: list = field(default_factory=list)
    method: str = "vp"
    p: list = field(default_factory=lambda: [2.0])
    E0: float = 216554.0
    quadrature: str = "tri-3"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    smoothing: float | None = None
    continuation: bool | None = None
    output: str = "imd-out"
    name: str = "run"
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        raw = _strip(raw)
        known = {"name", "domain", "mesh", "supports", "tractions", "point_forces", "method",
                 "p", "E0", "quadrature", "optimizer", "smoothing", "continuation", "output"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        domain = _strip(raw.get("domain") or {})
        mesh = _strip(raw.get("mesh") or {})
        kind = domain.get("type")
        if kind not in ("rect", "lshape", "file"):
            raise ConfigError("domain.type must be 'rect', 'lshape' or 'file'")
        if kind == "rect":
            _number(domain, "length"), _number(domain, "height")
            for key in ("nx", "ny"):
                if not isinstance(mesh.get(key), int) or mesh[key] < 1:
                    raise ConfigError(f"mesh.{key} must be a positive integer")
        elif kind == "lshape":
            _number(domain, "leg"), _number(domain, "thickness")
            _number(domain, "corner_radius", 0.0, positive=False)
            _number(mesh, "target_h")
        elif "path" not in domain:
            raise ConfigError("domain.path is required for a mesh file")
        if mesh.get("kind", QUAD4 if kind == "rect" else TRI3) not in (TRI3, QUAD4):
            raise ConfigError(f"mesh.kind must be {TRI3!r} or {QUAD4!r}")

        supports = raw.get("supports", [])
        if not isinstance(supports, list) or not all(isinstance(s, str) for s in supports):
            raise ConfigError("supports must be a list of group tags")
        tractions = _strip(raw.get("tractions") or {})
        for tag, t in tractions.items():
            if (not isinstance(t, (list, tuple)) or len(t) != 2
                    or not all(isinstance(x, (int, float)) for x in t)):
                raise ConfigError(f"traction of {tag!r} must be a pair of numbers")
        forces = raw.get("point_forces", [])
        for f in forces:
            if not isinstance(f, (list, tuple)) or len(f) != 3 or not isinstance(f[0], int):
                raise ConfigError("point forces are [node, fx, fy] triples")
        method = raw.get("method", "vp")
        if method not in ("vp", "sp"):
            raise ConfigError(f"method must be 'vp' or 'sp', got {method!r}")
        quadrature = raw.get("quadrature", "tri-3")
        if quadrature not in TRIANGLE_RULES:
            raise ConfigError(f"quadrature must be one of {sorted(TRIANGLE_RULES)}")
        opt = _strip(raw.get("optimizer") or {})
        try:
            optimizer = OptimizerConfig(**opt)
        except TypeError as exc:
            raise ConfigError(f"bad optimizer settings: {exc}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        smoothing = raw.get("smoothing")
        if smoothing is not None:
            smoothing = _number(raw, "smoothing", positive=False)
            if smoothing < 0:
                raise ConfigError("smoothing must be non-negative")
        continuation = raw.get("continuation")
        if continuation is not None and not isinstance(continuation, bool):
            raise ConfigError("continuation must be true or false")
        return cls(domain=domain, mesh=mesh, supports=list(supports), tractions=dict(tractions),
                   point_forces=[tuple(f) for f in forces], method=method,
                   p=parse_p_list(raw.get("p", 2.0)), E0=_number(raw, "E0", 216554.0),
                   quadrature=quadrature, optimizer=optimizer, smoothing=smoothing,
                   continuation=continuation, output=str(raw.get("output", "imd-out")),
                   name=str(raw.get("name", "run")), base_dir=base_dir or Path.cwd())

    def build_mesh(self) -> Mesh:
        d, m = self.domain, self.mesh
        if d["type"] == "rect":
            mesh = generate_rect_mesh(d["length"], d["height"], m["nx"], m["ny"],
                                      m.get("kind", QUAD4))
        elif d["type"] == "lshape":
            mesh = generate_lshape_mesh(d["leg"], d["thickness"], d.get("corner_radius", 0.0),
                                        m["target_h"], m.get("kind", TRI3),
                                        d.get("fillet_segments", 8))
        else:
            mesh = load_mesh(self.base_dir / d["path"])
        return promote_supports(mesh, self.supports)

    def model_kwargs(self) -> dict:
        return {"supports": self.supports or None, "tractions": self.tractions,
                "point_forces": self.point_forces, "triangle_rule": self.quadrature}

    def solve_kwargs(self) -> dict:
        return {"optimizer": self.optimizer, "smoothing": self.smoothing,
                "continuation": self.continuation}


def promote_supports(mesh: Mesh, tags) -> Mesh:
    """Give the named boundary groups the support role."""
    groups = []
    for g in mesh.groups:
        if g.tag in tags and g.role != SUPPORT:
            if g.traction is not None:
                raise ConfigError(f"group {g.tag!r} carries a traction and cannot be a support")
            g = type(g)(g.tag, g.edges, role=SUPPORT)
        groups.append(g)
    missing = set(tags) - {g.tag for g in mesh.groups}
    if missing:
        raise ConfigError(f"unknown support groups: {sorted(missing)}")
    return mesh.replace_groups(groups)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return RunConfig.from_dict(raw, base_dir=path.parent)


def benchmark_path(name: str) -> Path:
    if name not in BENCHMARKS:
        raise ConfigError(f"unknown benchmark {name!r}")
    return Path(str(resources.files("lpimd") / "benchmarks" / f"{name}.json"))


def load_benchmark(name: str) -> RunConfig:
    return load_config(benchmark_path(name))


def config_as_dict(cfg: RunConfig) -> dict[str, Any]:
    return {"name": cfg.name, "domain": cfg.domain, "mesh": cfg.mesh, "supports": cfg.supports,
            "tractions": cfg.tractions, "method": cfg.method,
            "p": ["inf" if math.isinf(p) else p for p in cfg.p], "E0": cfg.E0,
            "quadrature": cfg.quadrature}
