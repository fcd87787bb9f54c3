"""Run configuration: a JSON document mapped onto nested dataclasses."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .geometry import ConvexPolygon, make_regular_polygon
from .problem import ScatteringProblem, resolve_alpha


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending dotted path."""

    def __init__(self, field_path: str, msg: str):
        super().__init__(f"{field_path}: {msg}")
        self.field = field_path


@dataclass
class GeometryConfig:
    n_sides: int | None = 3
    side_length: float | None = 2 * math.pi
    vertices: list | None = None

    def polygon(self) -> ConvexPolygon:
        if self.vertices is not None:
            return ConvexPolygon(self.vertices)
        return make_regular_polygon(int(self.n_sides), float(self.side_length))


@dataclass
class ComplexValue:
    re: float = 1.0
    im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


@dataclass
class Tolerances:
    tol_b: float = 0.005
    tol_go: float = 0.01
    tol_bb: float = 0.01


@dataclass
class SpaceConfig:
    p: int = 3
    c_np: float = 1.5
    sigma1: float = 0.17
    sigma2: float = 0.15


@dataclass
class ReferenceConfig:
    dof_per_lambda2: float = 20.0
    p: int = 6
    p_corner: int = 5
    sigma: float = 0.15
    max_N: int = 20000


@dataclass
class QuadratureSettings:
    n_gauss: int = 20
    h_factor: float = 1.0


@dataclass
class FarFieldConfig:
    M: int | None = None


@dataclass
class FieldMapConfig:
    nx: int = 200
    ny: int = 200
    bbox: list | None = None


@dataclass
class SweepConfig:
    axis: str = "k1"
    values: list = field(default_factory=list)


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["json", "csv"])


@dataclass
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    k1: float = 10.0
    mu: ComplexValue = field(default_factory=lambda: ComplexValue(1.5, 0.003125))
    alpha: object = "unity"
    incident_angle_rad: float = math.pi / 2
    tolerances: Tolerances = field(default_factory=Tolerances)
    space: SpaceConfig = field(default_factory=SpaceConfig)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    farfield: FarFieldConfig = field(default_factory=FarFieldConfig)
    fieldmap: FieldMapConfig = field(default_factory=FieldMapConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    # -- conversion -------------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.alpha, ComplexValue):
            d["alpha"] = asdict(self.alpha)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = _build(cls, data, "")
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("--config", str(exc)) from exc
        return cls.from_dict(data)

    def with_overrides(self, assignments: list[str]) -> "RunConfig":
        """Apply ``dotted.path=value`` overrides (values parsed as JSON, else as strings)."""
        d = self.to_dict()
        for a in assignments:
            if "=" not in a:
                raise ConfigError(a, "override must look like key=value")
            key, raw = a.split("=", 1)
            try:
                val = json.loads(raw)
            except json.JSONDecodeError:
                val = raw
            parts = key.strip().split(".")
            node = d
            for p in parts[:-1]:
                if not isinstance(node, dict) or p not in node:
                    raise ConfigError(key, "unknown field")
                if node[p] is None:
                    node[p] = {}
                node = node[p]
            if not isinstance(node, dict) or (parts[-1] not in node and node is d):
                raise ConfigError(key, "unknown field")
            node[parts[-1]] = val
        return RunConfig.from_dict(d)

    # -- semantics ----------------------------------------------------------

    def alpha_mode(self) -> str:
        if isinstance(self.alpha, str):
            return self.alpha
        return "value"

    def alpha_value(self):
        if isinstance(self.alpha, ComplexValue):
            return self.alpha.value
        return self.alpha

    def validate(self) -> None:
        if not (isinstance(self.k1, (int, float)) and self.k1 > 0):
            raise ConfigError("k1", "must be a positive number")
        if self.mu.im < 0:
            raise ConfigError("mu.im", "Im(mu) must be ≥ 0")
        if not self.mu.re > 0:
            raise ConfigError("mu.re", "Re(mu) must be > 0")
        if isinstance(self.alpha, str) and self.alpha not in ("unity", "inv_mu_sq"):
            raise ConfigError("alpha", "must be 'unity', 'inv_mu_sq' or {re, im}")
        for name in ("tol_b", "tol_go", "tol_bb"):
            if not getattr(self.tolerances, name) > 0:
                raise ConfigError(f"tolerances.{name}", "must be positive")
        if self.space.p < 0:
            raise ConfigError("space.p", "must be non-negative")
        for name in ("c_np", "sigma1", "sigma2"):
            if not getattr(self.space, name) > 0:
                raise ConfigError(f"space.{name}", "must be positive")
        if not 0 < self.space.sigma1 < 1 or not 0 < self.space.sigma2 < 1:
            raise ConfigError("space.sigma", "grading parameters lie in (0, 1)")
        if not self.reference.dof_per_lambda2 > 0:
            raise ConfigError("reference.dof_per_lambda2", "must be positive")
        if self.reference.max_N < 1:
            raise ConfigError("reference.max_N", "must be positive")
        if self.sweep.axis not in ("k1", "angle", "mu_im", "mu"):
            raise ConfigError("sweep.axis", "must be one of k1, angle, mu_im, mu")
        if self.fieldmap.nx < 1 or self.fieldmap.ny < 1:
            raise ConfigError("fieldmap", "nx and ny must be positive")
        try:
            self.geometry.polygon()
        except (ValueError, TypeError) as exc:
            raise ConfigError("geometry", str(exc)) from exc
        try:
            self.problem()
        except ValueError as exc:
            raise ConfigError("alpha", str(exc)) from exc

    def problem(self) -> ScatteringProblem:
        mu = self.mu.value
        return ScatteringProblem.from_angle(self.geometry.polygon(), float(self.k1), mu,
                                            float(self.incident_angle_rad), resolve_alpha(self.alpha_value(), mu))

    def replace(self, **changes) -> "RunConfig":
        new = copy.deepcopy(self)
        for k, v in changes.items():
            setattr(new, k, v)
        new.validate()
        return new


def _build(cls, data, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected an object")
    if cls is GeometryConfig and "regular" in data:
        reg = data["regular"]
        if not isinstance(reg, dict):
            raise ConfigError(_join(prefix, "regular"), "expected {n_sides, side_length}")
        data = {**{k: v for k, v in data.items() if k != "regular"}, **reg}
    known = {f.name: f for f in fields(cls)}
    extra = set(data) - set(known)
    if extra:
        raise ConfigError(_join(prefix, sorted(extra)[0]), "unknown field")
    kwargs = {}
    defaults = cls()
    for name, f in known.items():
        path = _join(prefix, name)
        if name not in data:
            kwargs[name] = getattr(defaults, name)
            continue
        val = data[name]
        cur = getattr(defaults, name)
        if name == "alpha" and cls is RunConfig:
            kwargs[name] = val if isinstance(val, str) else _build(ComplexValue, val, path)
        elif is_dataclass(cur):
            kwargs[name] = _build(type(cur), val, path)
        else:
            kwargs[name] = _coerce(val, cur, path)
    return cls(**kwargs)


def _coerce(val, cur, path):
    if cur is None or val is None:
        return val
    if isinstance(cur, bool):
        if not isinstance(val, bool):
            raise ConfigError(path, "expected a boolean")
        return val
    if isinstance(cur, int):
        if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
            raise ConfigError(path, "expected an integer")
        return int(val)
    if isinstance(cur, float):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(path, "expected a number")
        return float(val)
    if isinstance(cur, str):
        if not isinstance(val, str):
            raise ConfigError(path, "expected a string")
        return val
    if isinstance(cur, list):
        if not isinstance(val, list):
            raise ConfigError(path, "expected a list")
        return val
    return val


def _join(prefix: str, name: str) -> str:
    return f"{prefix}.{name}" if prefix else name
