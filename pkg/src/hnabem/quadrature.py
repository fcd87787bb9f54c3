"""Panel quadrature for Galerkin boundary-element matrices.

All integrals over the boundary are discretised on one composite Gauss grid:
the boundary is cut into straight panels at every breakpoint of the trial and
test spaces (and of the right-hand side data), and panels longer than
``h_max`` are subdivided. Smooth panel pairs use the tensor product of the
panel rules. Pairs that are singular or nearly singular get dedicated rules,
and the panel's nodal values are carried onto the special points by Lagrange
interpolation:

* self pairs: the kernel depends on ``|t - t'|`` only, so the double integral
  collapses onto one graded rule in ``u = |t - t'|`` against exactly integrated
  products of Lagrange polynomials;
* pairs sharing an endpoint (same side or across a corner): Duffy
  transformation into two triangles with geometric grading in the radial
  variable;
* other pairs closer than ``NEAR_RATIO`` times the longer panel length:
  recursive bisection until every sub-pair is well separated.

A near-pair correction is stored as a dense ``n x n`` block that replaces the
tensor-product block of the pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .geometry import ConvexPolygon
from .specfun import gauss_legendre

NEAR_RATIO = 0.5
GRADING = 0.15
SELF_LAYERS = 18
DUFFY_LAYERS = 8


@dataclass
class PanelGrid:
    """Composite Gauss grid on the boundary.

    Attributes
    ----------
    side, a, b : ndarray, shape (P,)
        Side index and arclength interval of each panel.
    n : int
        Gauss points per panel.
    node_side, node_s, node_w : ndarray, shape (Q,)
        Side, arclength and quadrature weight of every node, Q = P n.
    node_x, node_n : ndarray, shape (Q, 2)
        Position and outward normal of every node.
    """

    poly: ConvexPolygon
    side: np.ndarray
    a: np.ndarray
    b: np.ndarray
    n: int
    node_side: np.ndarray = field(init=False)
    node_s: np.ndarray = field(init=False)
    node_w: np.ndarray = field(init=False)
    node_x: np.ndarray = field(init=False)
    node_n: np.ndarray = field(init=False)

    def __post_init__(self):
        rule = gauss_legendre(self.n)
        t = 0.5 * (rule.nodes + 1.0)
        h = self.b - self.a
        self.node_side = np.repeat(self.side, self.n)
        self.node_s = (self.a[:, None] + h[:, None] * t[None, :]).ravel()
        self.node_w = (0.5 * h[:, None] * rule.weights[None, :]).ravel()
        self.node_x = self.poly.vertices[self.node_side] + self.node_s[:, None] * self.poly.tangents[self.node_side]
        self.node_n = self.poly.normals[self.node_side]

    @property
    def n_panels(self) -> int:
        return self.side.size

    @property
    def n_nodes(self) -> int:
        return self.node_s.size

    @property
    def lengths(self) -> np.ndarray:
        return self.b - self.a

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        P = self.poly.vertices[self.side]
        T = self.poly.tangents[self.side]
        return P + self.a[:, None] * T, P + self.b[:, None] * T

    def panel_nodes(self, i: int) -> slice:
        return slice(i * self.n, (i + 1) * self.n)


def build_panel_grid(poly: ConvexPolygon, breakpoints, h_max: float, n: int = 20,
                     merge_tol: float = 1e-12) -> PanelGrid:
    """Panels split at ``breakpoints[j]`` (arclengths on side j) with length at most ``h_max``."""
    sides, aa, bb = [], [], []
    for j in range(poly.n_sides):
        L = float(poly.lengths[j])
        pts = np.concatenate([[0.0, L], np.asarray(breakpoints[j], dtype=float)])
        pts = np.sort(np.clip(pts, 0.0, L))
        keep = np.concatenate([[True], np.diff(pts) > merge_tol * L])
        pts = pts[keep]
        pts[-1] = L
        for a, b in zip(pts[:-1], pts[1:]):
            m = max(1, int(math.ceil((b - a) / h_max - 1e-9)))
            e = np.linspace(a, b, m + 1)
            sides += [j] * m
            aa += list(e[:-1])
            bb += list(e[1:])
    return PanelGrid(poly, np.array(sides), np.array(aa), np.array(bb), n)


@lru_cache(maxsize=None)
def _bary_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    rule = gauss_legendre(n)
    lam = (-1.0) ** np.arange(n) * np.sqrt((1 - rule.nodes**2) * rule.weights)
    return 0.5 * (rule.nodes + 1.0), lam


def lagrange_matrix(n: int, t) -> np.ndarray:
    """Values of the n Lagrange polynomials on the panel's Gauss nodes (in [0, 1]) at ``t``."""
    tn, lam = _bary_weights(n)
    t = np.asarray(t, dtype=float)
    d = t[:, None] - tn[None, :]
    exact = d == 0
    d[exact] = 1.0
    q = lam / d
    out = q / q.sum(axis=1, keepdims=True)
    rows = np.nonzero(exact.any(axis=1))[0]
    if rows.size:
        out[rows] = exact[rows].astype(float)
    return out


def _graded_rule(layers: int, npts: int, sigma: float = GRADING) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on [0, 1] geometrically graded towards 0."""
    rule = gauss_legendre(npts)
    edges = np.concatenate([[0.0], sigma ** np.arange(layers, -1, -1, dtype=float)])
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = rule.on_interval(a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=None)
def self_rule(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Graded rule in ``u = |t - t'|`` and the symmetrised moments.

    Returns ``u, w, S`` with ``S[k] = M(u_k) + M(u_k)^T`` and
    ``M_ab(u) = int_0^{1-u} L_a(t) L_b(t + u) dt``, so that for a kernel
    depending only on ``|t - t'|``

        int int K L_a(t) L_b(t') dt dt' = sum_k w_k K(u_k) S[k]_ab.
    """
    u, w = _graded_rule(SELF_LAYERS, n)
    rule = gauss_legendre(n)
    S = np.empty((u.size, n, n))
    for k, uk in enumerate(u):
        t, wt = rule.on_interval(0.0, 1.0 - uk)
        La = lagrange_matrix(n, t)
        Lb = lagrange_matrix(n, t + uk)
        M = (La * wt[:, None]).T @ Lb
        S[k] = M + M.T
    return u, w, S


@lru_cache(maxsize=None)
def duffy_offsets(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Duffy rule on [0,1]^2 for integrands singular at the origin: ``u, v, w``."""
    rho, wr = _graded_rule(DUFFY_LAYERS, 16)
    tau, wt = gauss_legendre(n).on_interval(0.0, 1.0)
    R, T = np.meshgrid(rho, tau, indexing="ij")
    W = (wr[:, None] * wt[None, :]) * R
    R, T, W = R.ravel(), T.ravel(), W.ravel()
    return np.concatenate([R, R * T]), np.concatenate([R * T, R]), np.concatenate([W, W])


@lru_cache(maxsize=None)
def duffy_rule(n: int, end_p: int, end_q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rule on [0,1]^2 for integrands singular at ``(t, t') = (end_p, end_q)``.

    Returns local coordinates ``t, t'`` and weights (Jacobian included).
    """
    u, v, w = duffy_offsets(n)
    t = u if end_p == 0 else 1.0 - u
    tq = v if end_q == 0 else 1.0 - v
    return t, tq, w


def _seg_dist(p0, p1, q0, q1) -> float:
    """Distance between two non-crossing segments."""
    def pt_seg(x, a, b):
        ab = b - a
        den = ab @ ab
        s = 0.0 if den == 0 else min(1.0, max(0.0, ((x - a) @ ab) / den))
        d = x - (a + s * ab)
        return math.hypot(d[0], d[1])
    return min(pt_seg(p0, q0, q1), pt_seg(p1, q0, q1), pt_seg(q0, p0, p1), pt_seg(q1, p0, p1))


def panel_distances(grid: PanelGrid) -> np.ndarray:
    """Matrix of distances between panels (vectorised segment-segment distance)."""
    A, B = grid.endpoints()

    def pt_seg(X, a, b):
        # X: (P, 2) points; a, b: (P, 2) segments -> (P_points, P_segments)
        ab = b - a
        den = np.einsum("ij,ij->i", ab, ab)
        s = np.einsum("pij,ij->pi", X[:, None, :] - a[None, :, :], ab) / den
        s = np.clip(s, 0.0, 1.0)
        d = X[:, None, :] - (a[None, :, :] + s[..., None] * ab[None, :, :])
        return np.hypot(d[..., 0], d[..., 1])

    d = np.minimum(pt_seg(A, A, B), pt_seg(B, A, B))
    return np.minimum(d, d.T)


@dataclass
class NearPairs:
    """Classification of panel pairs that need special quadrature."""

    self_panels: np.ndarray
    touching: list[tuple[int, int, int, int]]
    near: list[tuple[int, int]]
    mask: np.ndarray


def classify_pairs(grid: PanelGrid, ratio: float = NEAR_RATIO) -> NearPairs:
    P = grid.n_panels
    h = grid.lengths
    dist = panel_distances(grid)
    scale = np.maximum(h[:, None], h[None, :])
    near_mask = dist < ratio * scale
    A, B = grid.endpoints()
    tol = 1e-12 * grid.poly.diameter
    touching, near = [], []
    I, J = np.nonzero(near_mask)
    for i, j in zip(I, J):
        if i == j:
            continue
        ends_i = (A[i], B[i])
        ends_j = (A[j], B[j])
        hit = None
        for ei in (0, 1):
            for ej in (0, 1):
                d = ends_i[ei] - ends_j[ej]
                if abs(d[0]) <= tol and abs(d[1]) <= tol:
                    hit = (ei, ej)
        if hit is not None:
            touching.append((int(i), int(j), hit[0], hit[1]))
        else:
            near.append((int(i), int(j)))
    return NearPairs(np.arange(P), touching, near, near_mask)


def near_pair_points(grid: PanelGrid, i: int, j: int, ratio: float = NEAR_RATIO, n_sub: int | None = None,
                     max_depth: int = 40):
    """Local tensor-Gauss points for a close, non-touching pair via recursive bisection."""
    n_sub = n_sub or grid.n
    rule = gauss_legendre(n_sub)
    g = 0.5 * (rule.nodes + 1.0)
    poly = grid.poly
    Pi, Ti = poly.vertices[grid.side[i]], poly.tangents[grid.side[i]]
    Pj, Tj = poly.vertices[grid.side[j]], poly.tangents[grid.side[j]]
    hi, hj = grid.b[i] - grid.a[i], grid.b[j] - grid.a[j]
    ts, tqs, ws = [], [], []
    stack = [(0.0, 1.0, 0.0, 1.0, 0)]
    while stack:
        a0, a1, b0, b1, depth = stack.pop()
        p0 = Pi + (grid.a[i] + a0 * hi) * Ti
        p1 = Pi + (grid.a[i] + a1 * hi) * Ti
        q0 = Pj + (grid.a[j] + b0 * hj) * Tj
        q1 = Pj + (grid.a[j] + b1 * hj) * Tj
        li, lj = (a1 - a0) * hi, (b1 - b0) * hj
        d = _seg_dist(p0, p1, q0, q1)
        if d >= ratio * max(li, lj) or depth >= max_depth:
            T, TQ = np.meshgrid(a0 + (a1 - a0) * g, b0 + (b1 - b0) * g, indexing="ij")
            W = np.outer(rule.weights * 0.5 * (a1 - a0), rule.weights * 0.5 * (b1 - b0))
            ts.append(T.ravel())
            tqs.append(TQ.ravel())
            ws.append(W.ravel())
        elif li >= lj:
            m = 0.5 * (a0 + a1)
            stack += [(a0, m, b0, b1, depth + 1), (m, a1, b0, b1, depth + 1)]
        else:
            m = 0.5 * (b0 + b1)
            stack += [(a0, a1, b0, m, depth + 1), (a0, a1, m, b1, depth + 1)]
    return np.concatenate(ts), np.concatenate(tqs), np.concatenate(ws)
