"""Total traces, error norms, far-field patterns and field maps."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .beamtrace import GOField, go_field_at
from .bie import eval_potential
from .geometry import BoundaryPoint, Region, boundary_distance, locate_many
from .hnaspace import ApproximationSpace
from .problem import ScatteringProblem
from .quadrature import PanelGrid
from .solver import BoundaryTrace

ERROR_COLUMNS = ["k1", "mu_re", "mu_im", "alpha_mode", "theta_i", "N", "DOFperL1", "DOFperL2", "COND",
                 "err_u1_GO", "err_u1_HNA", "err_dudn_GO", "err_dudn_HNA", "err_F_PGOH", "err_F_HNA"]
FARFIELD_COLUMNS = ["theta", "re_F", "im_F", "abs_F", "log10_abs_F"]


# ---------------------------------------------------------------------------
# boundary traces


class TraceFunction:
    """Trace pair ``(u1, du1/dn)`` evaluable anywhere on the boundary.

    Sum of an optional GO field and an optional expansion in a space.
    """

    def __init__(self, problem: ScatteringProblem, go: GOField | None = None,
                 space: ApproximationSpace | None = None, coeffs=None, incident: bool = False):
        if (space is None) != (coeffs is None):
            raise ValueError("space and coeffs go together")
        self.problem = problem
        self.go = go
        self.space = space
        self.coeffs = None if coeffs is None else np.asarray(coeffs)
        self.incident = incident

    def __call__(self, side: int, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        u = np.zeros(s.shape, complex)
        q = np.zeros(s.shape, complex)
        if self.incident:
            poly = self.problem.polygon
            ui, g = self.problem.incident(poly.point(side, s))
            u += ui
            q += g @ poly.normals[side]
        if self.go is not None:
            a, b = self.go.evaluate(side, s)
            u += a
            q += b
        if self.space is not None:
            a, b = self.space.expand(self.coeffs, side, s)
            u += a
            q += b
        return u, q

    def breakpoints(self, side: int) -> np.ndarray:
        pts = [np.array([0.0, float(self.problem.polygon.lengths[side])])]
        if self.go is not None:
            pts.append(self.go.breakpoints(side))
        if self.space is not None:
            pts.append(self.space.breakpoints(side))
        return np.unique(np.concatenate(pts))

    def sample(self, grid: PanelGrid) -> BoundaryTrace:
        u = np.zeros(grid.n_nodes, complex)
        q = np.zeros(grid.n_nodes, complex)
        for j in range(grid.poly.n_sides):
            idx = np.nonzero(grid.node_side == j)[0]
            if idx.size:
                u[idx], q[idx] = self(j, grid.node_s[idx])
        return BoundaryTrace(grid, u, q)


def total_trace(go: GOField | None, result, space: ApproximationSpace, x: BoundaryPoint) -> tuple[complex, complex]:
    """``v_GO(x) + sum_b c_b phi_b(x)`` per component."""
    coeffs = result.coefficients if hasattr(result, "coefficients") else result
    u, q = space.expand(coeffs, x.side, np.array([x.s]))
    if go is not None:
        a, b = go.evaluate(x.side, np.array([x.s]))
        u, q = u + a, q + b
    return complex(u[0]), complex(q[0])


# ---------------------------------------------------------------------------
# error metrics


@dataclass
class ErrorReport:
    rel_L2_u1: float
    rel_L2_dudn: float
    rel_L2_F: float | None = None
    meta: dict = field(default_factory=dict)
    absolute: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def rel_l2(cand: np.ndarray, ref: np.ndarray, weights: np.ndarray) -> tuple[float, bool]:
    """Relative weighted L2 error; falls back to the absolute norm (flag True) if ``ref = 0``."""
    num = math.sqrt(float(np.sum(weights * np.abs(cand - ref) ** 2)))
    den = math.sqrt(float(np.sum(weights * np.abs(ref) ** 2)))
    if den == 0:
        return num, True
    return num / den, False


def rel_errors(cand: BoundaryTrace, ref: BoundaryTrace, cand_F=None, ref_F=None, meta=None) -> ErrorReport:
    if cand.grid is not ref.grid and cand.u.shape != ref.u.shape:
        raise ValueError("traces must share a sampling grid")
    w = ref.grid.node_w
    eu, au = rel_l2(cand.u, ref.u, w)
    eq, aq = rel_l2(cand.q, ref.q, w)
    absolute = {}
    if au:
        absolute["u1"] = True
    if aq:
        absolute["dudn"] = True
    eF = None
    if cand_F is not None and ref_F is not None:
        if cand_F.values.shape != ref_F.values.shape:
            raise ValueError("far fields must share angles")
        eF, aF = rel_l2(cand_F.values, ref_F.values, np.full(ref_F.values.size, 2 * math.pi / ref_F.values.size))
        if aF:
            absolute["F"] = True
    return ErrorReport(eu, eq, eF, dict(meta or {}), absolute)


# ---------------------------------------------------------------------------
# far field


def far_field_samples(k1: float) -> int:
    """Number of far-field angles used for error metrics."""
    return max(1024, int(math.ceil(20 * k1)))


@dataclass
class FarFieldPattern:
    angles: np.ndarray
    values: np.ndarray

    @property
    def M(self) -> int:
        return self.angles.size

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2) * 2 * math.pi / self.M))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(FARFIELD_COLUMNS)
            for t, v in zip(self.angles, self.values):
                a = abs(v)
                wr.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)), repr(float(a)),
                             repr(float(math.log10(a))) if a > 0 else "-inf"])

    @classmethod
    def from_csv(cls, path) -> "FarFieldPattern":
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        th = np.array([float(r["theta"]) for r in rows])
        v = np.array([complex(float(r["re_F"]), float(r["im_F"])) for r in rows])
        return cls(th, v)


def far_field(trace: BoundaryTrace, problem: ScatteringProblem, M: int | None = None,
              chunk: int = 256) -> FarFieldPattern:
    """``F(xhat) = -int exp(-i k1 xhat.y) (i k1 (xhat.n) u + du/dn) ds`` at M uniform angles.

    Angles are measured anticlockwise from the positive x axis.
    """
    M = far_field_samples(problem.k1) if M is None else int(M)
    if M < 1:
        raise ValueError("M must be positive")
    grid = trace.grid
    k1 = problem.k1
    th = 2 * math.pi * np.arange(M) / M
    xh = np.stack([np.cos(th), np.sin(th)], axis=1)
    w = grid.node_w
    wu = w * trace.u
    wq = w * trace.q
    n = grid.node_n
    out = np.empty(M, complex)
    for a in range(0, M, chunk):
        X = xh[a:a + chunk]
        E = np.exp(-1j * k1 * (X @ grid.node_x.T))
        xn = X @ n.T
        out[a:a + chunk] = -(E * (1j * k1 * xn)) @ wu - E @ wq
    return FarFieldPattern(th, out)


def scattered_far_asymptotic(F: complex, k1: float, r: float) -> complex:
    """Leading term of ``u^s`` at distance r in a direction with far-field value F."""
    return np.exp(1j * math.pi / 4) / (2 * math.sqrt(2 * math.pi)) * np.exp(1j * k1 * r) / math.sqrt(k1 * r) * F


# ---------------------------------------------------------------------------
# near field


@dataclass
class FieldValues:
    values: np.ndarray
    region: np.ndarray
    degraded: np.ndarray


def eval_field(x, trace: TraceFunction, problem: ScatteringProblem, tol: float = 1e-8,
               scattered: bool = False) -> FieldValues:
    """Total field from the boundary trace via Green's representation.

    Exterior: ``u^i - S1(du1/dn) + D1(u1)``; interior:
    ``(1/alpha) S2(du1/dn) - D2(u1)``. Boundary points are NaN. With
    ``scattered=True`` the incident term is dropped in the exterior.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    poly = problem.polygon
    reg = locate_many(poly, x)
    out = np.full(x.shape[0], np.nan + 0j)
    deg = np.zeros(x.shape[0], bool)

    def dens_u(side, s):
        return trace(side, s)[0]

    def dens_q(side, s):
        return trace(side, s)[1]

    bp = trace.breakpoints
    for name, medium in ((Region.EXTERIOR.value, 1), (Region.INTERIOR.value, 2)):
        m = reg == name
        if not m.any():
            continue
        S = eval_potential("single", medium, dens_q, x[m], problem, tol, bp)
        D = eval_potential("double", medium, dens_u, x[m], problem, tol, bp)
        if medium == 1:
            val = -S.values + D.values
            if not scattered:
                val = val + problem.incident(x[m])[0]
        else:
            val = S.values / problem.alpha - D.values
        out[m] = val
        deg[m] = S.degraded | D.degraded
    return FieldValues(out, reg, deg)


@dataclass
class FieldMap:
    """Total, GO and diffracted fields on a uniform Cartesian grid (NaN = no data)."""

    nx: int
    ny: int
    bbox: tuple[float, float, float, float]
    total: np.ndarray
    go: np.ndarray
    nodata: np.ndarray

    @property
    def diffracted(self) -> np.ndarray:
        return self.total - self.go

    def points(self) -> np.ndarray:
        return map_points(self.nx, self.ny, self.bbox)

    def write(self, directory, stem: str = "field") -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = []
        for qname, arr in (("total", self.total), ("go", self.go), ("diffracted", self.diffracted)):
            for part, fn in (("re", np.real), ("im", np.imag), ("abs", np.abs)):
                quantity = f"{qname}_{part}"
                p = d / f"{stem}_{quantity}.bin"
                np.ascontiguousarray(fn(arr).reshape(self.ny, self.nx), dtype="<f8").tofile(p)
                hdr = {"nx": self.nx, "ny": self.ny, "bbox": list(self.bbox), "quantity": quantity,
                       "dtype": "float64", "byteorder": "little", "order": "row-major (y, x)",
                       "nodata": "NaN"}
                (d / f"{stem}_{quantity}.json").write_text(json.dumps(hdr, indent=1))
                paths.append(p)
        return paths


def map_points(nx: int, ny: int, bbox) -> np.ndarray:
    x0, x1, y0, y1 = bbox
    X, Y = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny))
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def field_map(trace: TraceFunction, go: GOField, problem: ScatteringProblem, nx: int, ny: int, bbox,
              guard: float | None = None, tol: float = 1e-8) -> FieldMap:
    """Evaluate total and GO fields pixelwise; pixels within ``guard`` of the boundary are no-data."""
    if nx < 1 or ny < 1:
        raise ValueError("grid must be non-empty")
    pts = map_points(nx, ny, bbox)
    guard = 0.02 * min(problem.lambda1, problem.lambda2) if guard is None else guard
    nod = boundary_distance(problem.polygon, pts) <= guard
    tot = np.full(pts.shape[0], np.nan + 0j)
    gof = np.full(pts.shape[0], np.nan + 0j)
    ok = ~nod
    if ok.any():
        tot[ok] = eval_field(pts[ok], trace, problem, tol).values
        gof[ok] = go_field_at(go, pts[ok])
    return FieldMap(nx, ny, tuple(float(b) for b in bbox), tot, gof, nod)


# ---------------------------------------------------------------------------
# tables


def write_error_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=ERROR_COLUMNS, extrasaction="ignore")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: _fmt(r.get(k, "")) for k in ERROR_COLUMNS})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v
