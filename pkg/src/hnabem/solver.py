"""Galerkin assembly, direct solution and L2 projection.

The unknown is the trace pair ``v = (u, du/dn)`` on the boundary, expanded in
one scalar basis for each component. With coefficients ordered
``[Dirichlet..., Neumann...]`` the Galerkin matrix is

    [ c Gram + G11    G12          ]
    [ G21             c Gram + G22 ],   c = (1 + alpha) / 2,

where ``G_b[m, n] = int int conj(phi_m(x)) K_b(x, y) phi_n(y)`` and the
kernels ``K_b`` are those of :func:`hnabem.bie.block_kernels`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .beamtrace import GOField
from .bie import block_kernels
from .hnaspace import ApproximationSpace, build_conventional_space
from .problem import ScatteringProblem
from .quadrature import (NEAR_RATIO, PanelGrid, build_panel_grid, classify_pairs, duffy_offsets, duffy_rule,
                         lagrange_matrix, near_pair_points, self_rule)

log = logging.getLogger(__name__)

ABORT_TOL = 1e-6


class NumericalError(RuntimeError):
    """Raised when a solve or assembly cannot meet its accuracy guarantees."""

    def __init__(self, msg: str, singular_values=None):
        super().__init__(msg)
        self.singular_values = singular_values


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel quadrature parameters.

    ``h_factor`` sets the longest panel as a multiple of the shortest
    wavelength; ``n_gauss`` is the number of Gauss points per panel.
    """

    n_gauss: int = 20
    h_factor: float = 1.0
    near_ratio: float = NEAR_RATIO
    chunk: int = 400

    def refined(self) -> "QuadratureConfig":
        return QuadratureConfig(self.n_gauss + 6, 0.5 * self.h_factor, self.near_ratio, self.chunk)


@dataclass
class QuadratureReport:
    n_panels: int
    n_nodes: int
    n_touching: int
    n_near: int
    max_entry_error: float | None = None


@dataclass
class GalerkinSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    space: ApproximationSpace
    report: QuadratureReport
    gram: np.ndarray = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SolveResult:
    coefficients: np.ndarray
    condition_2norm: float
    residual_norm: float
    space: ApproximationSpace
    singular_values: np.ndarray | None = field(default=None, repr=False)
    rank_deficient: bool = False

    @property
    def meta(self) -> dict:
        out = self.space.summary()
        out["cond"] = self.condition_2norm
        out["residual"] = self.residual_norm
        out["rank_deficient"] = self.rank_deficient
        return out


# ---------------------------------------------------------------------------
# quadrature of the operator blocks


def _grid_for(problem: ScatteringProblem, space: ApproximationSpace, go: GOField | None,
              qc: QuadratureConfig) -> PanelGrid:
    poly = problem.polygon
    bps = []
    for j in range(poly.n_sides):
        b = [space.breakpoints(j)]
        if go is not None:
            b.append(go.breakpoints(j))
        bps.append(np.concatenate(b))
    lam = 2 * math.pi / problem.k_max
    return build_panel_grid(poly, bps, qc.h_factor * lam, qc.n_gauss)


def _dense_or_sparse(B: sp.csr_matrix):
    if B.shape[0] * B.shape[1] <= 4e7:
        return B.toarray()
    return B


def _side_kernels(problem, grid, xi, yi, tx, ty):
    """Kernel values for pairs of panels ``xi``, ``yi`` at local coordinates ``tx``, ``ty``.

    ``xi, yi`` have shape (m,), ``tx, ty`` shape (m, M); returns four (m, M) arrays.
    """
    poly = grid.poly
    sx, sy = grid.side[xi], grid.side[yi]
    hx = (grid.b - grid.a)[xi]
    hy = (grid.b - grid.a)[yi]
    X = poly.vertices[sx][:, None, :] + (grid.a[xi][:, None] + hx[:, None] * tx)[..., None] * poly.tangents[sx][:, None, :]
    Y = poly.vertices[sy][:, None, :] + (grid.a[yi][:, None] + hy[:, None] * ty)[..., None] * poly.tangents[sy][:, None, :]
    m, M = tx.shape
    NX = np.broadcast_to(poly.normals[sx][:, None, :], (m, M, 2)).reshape(-1, 2)
    NY = np.broadcast_to(poly.normals[sy][:, None, :], (m, M, 2)).reshape(-1, 2)
    SX = np.broadcast_to(sx[:, None], (m, M)).ravel()
    SY = np.broadcast_to(sy[:, None], (m, M)).ravel()
    K = block_kernels(problem, X.reshape(-1, 2), NX, SX, Y.reshape(-1, 2), NY, SY, outer=False)
    return [k.reshape(m, M) for k in K]


def _touch_kernels(problem, grid, pi, pj, ei, ej, du, dv):
    """Kernels for panel pairs sharing the endpoint ``ei`` of ``pi`` and ``ej`` of ``pj``.

    Points are placed relative to the shared endpoint (distances ``du h_i`` and
    ``dv h_j`` from it) so that tiny separations keep full relative accuracy.
    """
    poly = grid.poly
    sx, sy = grid.side[pi], grid.side[pj]
    tx = poly.tangents[sx] * (1.0 if ei == 0 else -1.0)
    ty = poly.tangents[sy] * (1.0 if ej == 0 else -1.0)
    h = grid.lengths
    X = (h[pi][:, None] * du[None, :])[..., None] * tx[:, None, :]
    Y = (h[pj][:, None] * dv[None, :])[..., None] * ty[:, None, :]
    m, M = X.shape[:2]
    NX = np.broadcast_to(poly.normals[sx][:, None, :], (m, M, 2)).reshape(-1, 2)
    NY = np.broadcast_to(poly.normals[sy][:, None, :], (m, M, 2)).reshape(-1, 2)
    SX = np.broadcast_to(sx[:, None], (m, M)).ravel()
    SY = np.broadcast_to(sy[:, None], (m, M)).ravel()
    K = block_kernels(problem, X.reshape(-1, 2), NX, SX, Y.reshape(-1, 2), NY, SY, outer=False)
    return [k.reshape(m, M) for k in K]


def near_corrections(problem: ScatteringProblem, grid: PanelGrid, ratio: float = NEAR_RATIO,
                     batch: int = 48) -> tuple[list[sp.csr_matrix], object]:
    """Sparse ``Q x Q`` blocks replacing the tensor rule on singular and close panel pairs.

    Entry ``(a, b)`` of a panel-pair block approximates
    ``int int L_a(x) K(x, y) L_b(y) dx dy`` with ``L`` the Lagrange basis on the
    panel's Gauss nodes.
    """
    n = grid.n
    pairs = classify_pairs(grid, ratio)
    h = grid.lengths
    blocks: list[tuple[int, int, np.ndarray]] = []

    # self panels: K11 = K22 = 0, K12 and K21 depend on |t - t'| only
    u, w, S = self_rule(n)
    P = grid.n_panels
    for start in range(0, P, batch):
        idx = np.arange(start, min(P, start + batch))
        tx = np.zeros((idx.size, u.size))
        ty = np.broadcast_to(u, (idx.size, u.size))
        # the kernels are translation invariant: place x at the origin so tiny
        # separations u h are represented exactly
        poly = grid.poly
        sx = grid.side[idx]
        Y = (h[idx][:, None] * ty)[..., None] * poly.tangents[sx][:, None, :]
        Xb = np.zeros((Y.shape[0] * Y.shape[1], 2))
        NX = np.broadcast_to(poly.normals[sx][:, None, :], Y.shape).reshape(-1, 2)
        SX = np.broadcast_to(sx[:, None], tx.shape).ravel()
        K = block_kernels(problem, Xb, NX, SX, Y.reshape(-1, 2), NX, SX, outer=False)
        for bi, k in enumerate(K):
            if bi in (0, 3):
                blocks.append((bi, idx, None))
                continue
            vals = k.reshape(idx.size, u.size) * w[None, :] * (h[idx] ** 2)[:, None]
            C = (vals @ S.reshape(u.size, -1)).reshape(idx.size, n, n)
            blocks.append((bi, idx, C))

    def accumulate(pi, pj, tx, ty, ww, Lx, Ly, K=None):
        if K is None:
            K = _side_kernels(problem, grid, pi, pj, tx, ty)
        scale = (h[pi] * h[pj])[:, None]
        out = []
        for k in K:
            wk = k * ww * scale
            out.append(np.matmul(Lx.T[None], wk[:, :, None] * Ly[None]))
        return out

    touch_entries: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    touch_idx = []
    by_pattern: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for i, j, ei, ej in pairs.touching:
        by_pattern.setdefault((ei, ej), []).append((i, j))
    for (ei, ej), lst in sorted(by_pattern.items()):
        t, tq, ww = duffy_rule(n, ei, ej)
        du, dv, _ = duffy_offsets(n)
        Lx = lagrange_matrix(n, t)
        Ly = lagrange_matrix(n, tq)
        arr = np.array(lst)
        for start in range(0, len(arr), 8):
            sub = arr[start:start + 8]
            K = _touch_kernels(problem, grid, sub[:, 0], sub[:, 1], ei, ej, du, dv)
            Cs = accumulate(sub[:, 0], sub[:, 1], None, None, ww[None, :], Lx, Ly, K)
            for b in range(4):
                touch_entries[b].append(Cs[b])
            touch_idx.append(sub)

    near_entries: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    near_idx = []
    for i, j in pairs.near:
        t, tq, ww = near_pair_points(grid, i, j, ratio, n)
        Lx = lagrange_matrix(n, t)
        Ly = lagrange_matrix(n, tq)
        Cs = accumulate(np.array([i]), np.array([j]), t[None, :], tq[None, :], ww[None, :], Lx, Ly)
        for b in range(4):
            near_entries[b].append(Cs[b])
        near_idx.append(np.array([[i, j]]))

    Q = grid.n_nodes
    loc = np.arange(n)
    mats = []
    for b in range(4):
        rows, cols, vals = [], [], []

        def add(pi, pj, C):
            r = (pi[:, None] * n + loc[None, :])
            c = (pj[:, None] * n + loc[None, :])
            rows.append(np.broadcast_to(r[:, :, None], C.shape).ravel())
            cols.append(np.broadcast_to(c[:, None, :], C.shape).ravel())
            vals.append(C.ravel())

        for bi, idx, C in blocks:
            if bi == b and C is not None:
                add(idx, idx, C)
        for sub, C in zip(touch_idx, touch_entries[b]):
            add(sub[:, 0], sub[:, 1], C)
        for sub, C in zip(near_idx, near_entries[b]):
            add(sub[:, 0], sub[:, 1], C)
        if rows:
            M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(Q, Q))
        else:
            M = sp.csr_matrix((Q, Q), dtype=complex)
        mats.append(M)
    return mats, pairs


def operator_blocks(problem: ScatteringProblem, grid: PanelGrid, Bx, By, data=None,
                    ratio: float = NEAR_RATIO, chunk: int = 400):
    """Galerkin blocks ``Bx^H K_b By`` and, optionally, ``Bx^H K_b data_b``.

    ``Bx`` and ``By`` hold test and trial functions at the grid nodes (dense
    arrays or sparse matrices, shape (Q, m)). ``data`` is a pair of nodal
    vectors ``(u, q)``; block ``b = (r, c)`` acts on ``data[c]``.
    """
    Q = grid.n_nodes
    n = grid.n
    w = grid.node_w
    corr, pairs = near_corrections(problem, grid, ratio)
    panel_of = np.repeat(np.arange(grid.n_panels), n)
    G = [np.zeros((Bx.shape[1], By.shape[1]), complex) for _ in range(4)]
    y = [np.zeros(Q, complex) for _ in range(4)] if data is not None else None
    BxH = Bx.conj().T
    for start in range(0, Q, chunk):
        rows = slice(start, min(Q, start + chunk))
        K = block_kernels(problem, grid.node_x[rows], grid.node_n[rows], grid.node_side[rows],
                          grid.node_x, grid.node_n, grid.node_side, outer=True, allow_coincident=True)
        mask = pairs.mask[np.ix_(panel_of[rows], panel_of)]
        wr = w[rows]
        for b in range(4):
            Kw = K[b] * wr[:, None] * w[None, :]
            Kw[mask] = 0.0
            Gpart = BxH[:, rows] @ (Kw @ By) if not sp.issparse(By) else BxH[:, rows] @ np.asarray((By.T @ Kw.T).T)
            G[b] += np.asarray(Gpart)
            if data is not None:
                y[b][rows] += Kw @ data[b % 2]
    for b in range(4):
        CB = corr[b] @ By
        G[b] += np.asarray(BxH @ (CB.toarray() if sp.issparse(CB) else CB))
        if data is not None:
            y[b] += corr[b] @ data[b % 2]
    rep = QuadratureReport(grid.n_panels, Q, len(pairs.touching), len(pairs.near))
    if data is None:
        return G, None, rep
    return G, [np.asarray(BxH @ yb) for yb in y], rep


def _nodal_incident(problem: ScatteringProblem, grid: PanelGrid):
    u, grad = problem.incident(grid.node_x)
    return u, np.einsum("ij,ij->i", grad, grid.node_n)


def _nodal_go(go: GOField, grid: PanelGrid):
    u = np.zeros(grid.n_nodes, complex)
    q = np.zeros(grid.n_nodes, complex)
    for j in range(grid.poly.n_sides):
        idx = np.nonzero(grid.node_side == j)[0]
        if idx.size:
            u[idx], q[idx] = go.evaluate(j, grid.node_s[idx])
    return u, q


def assemble(space: ApproximationSpace, problem: ScatteringProblem, go: GOField | None = None,
             qc: QuadratureConfig = QuadratureConfig(), kernels: bool = True) -> GalerkinSystem:
    """Galerkin matrix and right-hand side ``<f - A v_GO, phi_m>`` (or ``<f, phi_m>`` without GO).

    ``kernels=False`` keeps only the identity part of the operator.
    """
    if abs(space.k1 - problem.k1) > 1e-12 * problem.k1 or abs(space.k2 - problem.k2) > 1e-12 * abs(problem.k2):
        raise ValueError("space and problem wavenumbers differ")
    grid = _grid_for(problem, space, go, qc)
    B = _dense_or_sparse(space.evaluate_nodes(grid.node_side, grid.node_s))
    BH = B.conj().T
    w = grid.node_w
    c = 0.5 * (1.0 + problem.alpha)
    WB = B.multiply(w[:, None]).tocsr() if sp.issparse(B) else B * w[:, None]
    gram = np.asarray(BH @ WB)
    if sp.issparse(gram):
        gram = gram.toarray()
    fu, fq = _nodal_incident(problem, grid)
    if go is not None:
        gu, gq = _nodal_go(go, grid)
    else:
        gu = gq = np.zeros(grid.n_nodes, complex)
    ns = space.n_scalar
    if kernels:
        data = (gu, gq) if go is not None else None
        G, y, rep = operator_blocks(problem, grid, B, B, data, qc.near_ratio, qc.chunk)
    else:
        G = [np.zeros((ns, ns), complex) for _ in range(4)]
        y = None
        rep = QuadratureReport(grid.n_panels, grid.n_nodes, 0, 0)
    M = np.empty((2 * ns, 2 * ns), complex)
    M[:ns, :ns] = c * gram + G[0]
    M[:ns, ns:] = G[1]
    M[ns:, :ns] = G[2]
    M[ns:, ns:] = c * gram + G[3]
    rhs = np.concatenate([BH @ (w * (fu - c * gu)), BH @ (w * (fq - c * gq))])
    rhs = np.asarray(rhs).ravel()
    if y is not None:
        rhs[:ns] -= y[0] + y[1]
        rhs[ns:] -= y[2] + y[3]
    return GalerkinSystem(M, rhs, space, rep, gram)


# ---------------------------------------------------------------------------
# solving


def _lstsq_solve(system: GalerkinSystem, rcond: float = 1e-13) -> SolveResult:
    M, b = system.matrix, system.rhs
    U, sv, Vh = sla.svd(M)
    keep = sv > rcond * sv[0]
    x = Vh[keep].conj().T @ ((U[:, keep].conj().T @ b) / sv[keep])
    res = float(np.linalg.norm(b - M @ x))
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    return SolveResult(x, cond, res, system.space, sv, rank_deficient=True)


def solve(system: GalerkinSystem, condition: bool = True, singular: str = "raise") -> SolveResult:
    """Dense LU solve with one step of iterative refinement.

    The 2-norm condition number comes from a full SVD (``condition=False``
    skips it and reports NaN). A numerically singular matrix raises
    :class:`NumericalError`, or with ``singular="lstsq"`` falls back to the
    minimum-norm truncated-SVD solution (this happens for spaces containing
    redundant functions, e.g. when both media share one wavenumber).
    """
    M, b = system.matrix, system.rhs
    if M.shape[0] != M.shape[1] or M.shape[0] != b.size:
        raise ValueError("system must be square and match the rhs")
    if singular not in ("raise", "lstsq"):
        raise ValueError("singular must be 'raise' or 'lstsq'")
    sv = None
    cond = float("nan")
    if condition:
        sv = sla.svd(M, compute_uv=False)
        if sv[-1] < 1e-15 * sv[0]:
            if singular == "lstsq":
                log.warning("numerically singular matrix (cond %.2e); using truncated SVD", sv[0] / max(sv[-1], 1e-300))
                return _lstsq_solve(system)
            raise NumericalError("numerically singular Galerkin matrix", sv)
        cond = float(sv[0] / sv[-1])
    try:
        lu = sla.lu_factor(M, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise NumericalError(f"factorisation failed: {exc}") from exc
    x = sla.lu_solve(lu, b)
    r = b - M @ x
    x = x + sla.lu_solve(lu, r)
    res = float(np.linalg.norm(b - M @ x))
    nb = float(np.linalg.norm(b))
    if res > 1e-10 * max(nb, np.finfo(float).tiny):
        raise NumericalError(f"residual {res:.3e} exceeds 1e-10 |b| = {1e-10 * nb:.3e}", sv)
    return SolveResult(x, cond, res, system.space, sv)


# ---------------------------------------------------------------------------
# traces sampled on a fine grid


@dataclass
class BoundaryTrace:
    """Trace pair sampled at the nodes of a composite Gauss grid."""

    grid: PanelGrid
    u: np.ndarray
    q: np.ndarray

    def norm(self, which: str = "u") -> float:
        v = self.u if which == "u" else self.q
        return float(np.sqrt(np.sum(self.grid.node_w * np.abs(v) ** 2)))

    def __sub__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        return BoundaryTrace(self.grid, self.u - other.u, self.q - other.q)

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        return BoundaryTrace(self.grid, self.u + other.u, self.q + other.q)


def sampling_grid(problem: ScatteringProblem, breakpoint_sets=(), per_lambda: float = 1.0,
                  n: int = 20) -> PanelGrid:
    """Composite Gauss grid split at every breakpoint of the given spaces/GO fields.

    Each object in ``breakpoint_sets`` must have a ``breakpoints(side)`` method.
    Panels are at most ``per_lambda`` shortest wavelengths long.
    """
    poly = problem.polygon
    bps = [np.concatenate([np.asarray(o.breakpoints(j), float) for o in breakpoint_sets] + [np.zeros(0)])
           for j in range(poly.n_sides)]
    return build_panel_grid(poly, bps, per_lambda * 2 * math.pi / problem.k_max, n)


def sample_space(space: ApproximationSpace, coeffs, grid: PanelGrid) -> BoundaryTrace:
    B = space.evaluate_nodes(grid.node_side, grid.node_s)
    ns = space.n_scalar
    coeffs = np.asarray(coeffs)
    return BoundaryTrace(grid, np.asarray(B @ coeffs[:ns]), np.asarray(B @ coeffs[ns:]))


def sample_go(go: GOField, grid: PanelGrid) -> BoundaryTrace:
    u, q = _nodal_go(go, grid)
    return BoundaryTrace(grid, u, q)


def sample_incident(problem: ScatteringProblem, grid: PanelGrid) -> BoundaryTrace:
    u, q = _nodal_incident(problem, grid)
    return BoundaryTrace(grid, u, q)


def best_approximation(space: ApproximationSpace, target: BoundaryTrace, rcond: float = 1e-13) -> SolveResult:
    """L2 projection of a sampled trace pair onto the space, componentwise.

    The target grid must resolve both the target and the space (its panels
    should be split at the space's breakpoints).
    """
    grid = target.grid
    B = space.evaluate_nodes(grid.node_side, grid.node_s)
    B = B.toarray() if B.shape[0] * B.shape[1] <= 4e7 else B
    BH = B.conj().T
    w = grid.node_w
    WB = B * w[:, None] if not sp.issparse(B) else B.multiply(w[:, None]).tocsr()
    gram = np.asarray(BH @ WB)
    if sp.issparse(gram):
        gram = gram.toarray()
    bu = np.asarray(BH @ (w * target.u)).ravel()
    bq = np.asarray(BH @ (w * target.q)).ravel()
    sv = np.linalg.svd(gram, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if sv[-1] < rcond * sv[0]:
        log.warning("rank-deficient Gram matrix (cond %.2e); using regularised least squares", cond)
        cu = sla.lstsq(gram, bu, cond=rcond)[0]
        cq = sla.lstsq(gram, bq, cond=rcond)[0]
    else:
        cho = sla.cho_factor(0.5 * (gram + gram.conj().T))
        cu = sla.cho_solve(cho, bu)
        cq = sla.cho_solve(cho, bq)
    x = np.concatenate([cu, cq])
    res = float(np.hypot(np.linalg.norm(gram @ cu - bu), np.linalg.norm(gram @ cq - bq)))
    return SolveResult(x, cond, res, space, sv)


@dataclass
class ReferenceSolution:
    """Conventional-space solution and the boundary trace it defines."""

    problem: ScatteringProblem
    space: ApproximationSpace
    result: SolveResult

    def breakpoints(self, side: int) -> np.ndarray:
        return self.space.breakpoints(side)

    def sample(self, grid: PanelGrid) -> BoundaryTrace:
        return sample_space(self.space, self.result.coefficients, grid)

    def trace(self, side: int, s) -> tuple[np.ndarray, np.ndarray]:
        return self.space.expand(self.result.coefficients, side, s)


def solve_reference(problem: ScatteringProblem, dof_per_lambda2: float, p: int = 3, c_np: float = 1.5,
                    sigma: float = 0.15, p_corner: int | None = None,
                    qc: QuadratureConfig = QuadratureConfig(), condition: bool = False) -> ReferenceSolution:
    """Galerkin solve of ``A v = f`` in a conventional hp space (no GO splitting)."""
    space = build_conventional_space(problem, dof_per_lambda2, p=p, c_np=c_np, sigma=sigma, p_corner=p_corner)
    system = assemble(space, problem, None, qc)
    return ReferenceSolution(problem, space, solve(system, condition=condition))


# ---------------------------------------------------------------------------
# binary dump


def dump_system(system: GalerkinSystem, directory, stem: str = "system") -> tuple[Path, Path, Path]:
    """Write matrix and rhs as little-endian complex128 (row-major) with a JSON sidecar."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    mp = d / f"{stem}_matrix.bin"
    rp = d / f"{stem}_rhs.bin"
    np.ascontiguousarray(system.matrix, dtype="<c16").tofile(mp)
    np.ascontiguousarray(system.rhs, dtype="<c16").tofile(rp)
    sp_ = system.space
    side = {
        "dtype": "complex128", "byteorder": "little", "order": "row-major",
        "shape": list(system.matrix.shape), "rhs_length": int(system.rhs.size),
        "component_order": ["dirichlet", "neumann"],
        "space": sp_.summary(),
        "elements": [{"side": e.side, "s": [e.s_a, e.s_b], "degree": e.degree,
                      "corner": e.corner, "wavenumber": e.wavenumber} for e in sp_.elements],
        "quadrature": vars(system.report),
    }
    jp = d / f"{stem}.json"
    jp.write_text(json.dumps(side, indent=1, default=float))
    return mp, rp, jp


def load_system(json_path) -> tuple[np.ndarray, np.ndarray, dict]:
    jp = Path(json_path)
    meta = json.loads(jp.read_text())
    stem = jp.stem
    M = np.fromfile(jp.with_name(f"{stem}_matrix.bin"), dtype="<c16").reshape(meta["shape"])
    b = np.fromfile(jp.with_name(f"{stem}_rhs.bin"), dtype="<c16")
    return M, b, meta
