"""Approximation spaces for the boundary data.

The HNA space represents the diffracted remainder as

    v^d(x) ~ sum_j [ v1^j(x) exp(i k1 r_j(x)) + v2^j(x) exp(i k2 r_j(x)) ],

with ``r_j`` the distance to corner ``P_j`` and each amplitude a piecewise
polynomial. The ``k1`` amplitudes live on the two sides meeting at ``P_j``; the
``k2`` amplitudes live on the whole boundary. On the sides adjacent to ``P_j`` the
meshes are geometrically graded towards the corner, and on the remaining sides
a single element per side is split at strong beam-boundary points that
originate at ``P_j``.

Each scalar function ``c L_m(affine(s)) exp(i k r_j)`` is normalised in L2 and
used for both the Dirichlet and the Neumann component. Coefficient vectors are
ordered ``[Dirichlet..., Neumann...]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import BoundaryPoint, ConvexPolygon
from .problem import ScatteringProblem
from .specfun import gauss_legendre, legendre, legendre_table

COMPONENTS = ("dirichlet", "neumann")


@dataclass(frozen=True)
class GradedMesh:
    """Points ``0, sigma^(n-1), ..., sigma, 1`` on [0, 1]."""

    n: int
    sigma: float
    points: np.ndarray


def graded_mesh(n: int, sigma: float) -> GradedMesh:
    if n < 1:
        raise ValueError("graded mesh needs n >= 1")
    if not 0 < sigma < 1:
        raise ValueError("grading parameter must lie in (0, 1)")
    pts = np.concatenate([[0.0], sigma ** (n - np.arange(1, n + 1, dtype=float))])
    return GradedMesh(n, sigma, pts)


def degree_vector(p: int, n: int) -> np.ndarray:
    """Linear-slope degrees for the n elements of a graded mesh (corner element first)."""
    if p < 0 or n < 1:
        raise ValueError("need p >= 0 and n >= 1")
    i = np.arange(1, n + 1)
    deg = p - np.floor((n + 1 - i) * p / n).astype(int)
    deg[-1] = p
    return deg


def layer_count(p: int, c_np: float) -> int:
    return int(math.ceil(c_np * (p + 1) - 1e-12))


def hna_dimension(n_sides: int, p: int, n_bb: int, c_np: float = 1.5) -> int:
    """Dimension of the HNA space from its element count.

    Each corner contributes four graded meshes (two wavenumbers times two
    adjacent sides) plus one degree-p element per non-adjacent side and per
    inserted beam-boundary point; both components double the count.
    """
    pv = degree_vector(p, layer_count(p, c_np))
    return 2 * ((p + 1) * (n_sides * (n_sides - 2) + n_bb) + 4 * n_sides * int(np.sum(pv + 1)))


@dataclass(frozen=True)
class Element:
    """Group of functions ``L_0..L_degree`` sharing a support and a phase."""

    side: int
    s_a: float
    s_b: float
    degree: int
    k_phase: complex
    corner: int | None
    wavenumber: int | None
    first: int


@dataclass(frozen=True)
class BasisFunction:
    """Scalar function ``c L_m(2(s - s_a)/(s_b - s_a) - 1) exp(i k r_corner)`` on one side."""

    component: str
    side: int
    s_a: float
    s_b: float
    degree: int
    wavenumber: int | None
    corner: int | None
    k_phase: complex
    c: float


@dataclass
class ApproximationSpace:
    """Span of component-tagged basis functions.

    Attributes
    ----------
    polygon : ConvexPolygon
    elements : list of Element
    norms : ndarray
        Normalisation constant of each scalar function.
    n_bb : int
        Number of inserted beam-boundary mesh points (HNA spaces only).
    kind : str
        ``"hna"`` or ``"conventional"``.
    """

    polygon: ConvexPolygon
    elements: list[Element]
    norms: np.ndarray
    kind: str
    k1: float
    k2: complex
    n_bb: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_scalar(self) -> int:
        return self.norms.size

    @property
    def N(self) -> int:
        return 2 * self.n_scalar

    @property
    def dof_per_lambda1(self) -> float:
        return self.N / (2 * self.polygon.perimeter * self.k1 / (2 * math.pi))

    @property
    def dof_per_lambda2(self) -> float:
        return self.N / (2 * self.polygon.perimeter * self.k2.real / (2 * math.pi))

    @property
    def basis(self) -> list[BasisFunction]:
        out = []
        for comp in COMPONENTS:
            for el in self.elements:
                for m in range(el.degree + 1):
                    out.append(BasisFunction(comp, el.side, el.s_a, el.s_b, m, el.wavenumber,
                                             el.corner, el.k_phase, float(self.norms[el.first + m])))
        return out

    def breakpoints(self, side: int) -> np.ndarray:
        pts = [0.0, float(self.polygon.lengths[side])]
        for el in self.elements:
            if el.side == side:
                pts += [el.s_a, el.s_b]
        return np.unique(np.array(pts))

    def _element_values(self, el: Element, s: np.ndarray) -> np.ndarray:
        xi = 2.0 * (s - el.s_a) / (el.s_b - el.s_a) - 1.0
        vals = legendre_table(el.degree, xi).T.astype(complex)
        if el.corner is not None:
            x = self.polygon.point(el.side, s) - self.polygon.vertices[el.corner]
            vals *= np.exp(1j * el.k_phase * np.hypot(x[:, 0], x[:, 1]))[:, None]
        return vals * self.norms[el.first:el.first + el.degree + 1]

    def evaluate(self, side: int, s) -> sp.csr_matrix:
        """Scalar basis values at arclengths ``s`` on ``side``: sparse (len(s), n_scalar)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L = self.polygon.lengths[side]
        rows, cols, vals = [], [], []
        for el in self.elements:
            if el.side != side:
                continue
            # half-open supports so shared element endpoints are not counted twice
            upper = (s < el.s_b) | ((el.s_b >= L) & (s <= el.s_b))
            idx = np.nonzero((s >= el.s_a) & upper)[0]
            if idx.size == 0:
                continue
            v = self._element_values(el, s[idx])
            rows.append(np.repeat(idx, el.degree + 1))
            cols.append(np.tile(np.arange(el.first, el.first + el.degree + 1), idx.size))
            vals.append(v.ravel())
        if not rows:
            return sp.csr_matrix((s.size, self.n_scalar), dtype=complex)
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(s.size, self.n_scalar))

    def evaluate_nodes(self, sides: np.ndarray, s: np.ndarray) -> sp.csr_matrix:
        """Scalar basis values at a set of boundary nodes given by side index and arclength."""
        blocks = []
        order = []
        for j in range(self.polygon.n_sides):
            idx = np.nonzero(sides == j)[0]
            if idx.size:
                blocks.append(self.evaluate(j, s[idx]))
                order.append(idx)
        if not blocks:
            return sp.csr_matrix((s.size, self.n_scalar), dtype=complex)
        stacked = sp.vstack(blocks).tocsr()
        perm = np.empty(s.size, dtype=int)
        perm[np.concatenate(order)] = np.arange(s.size)
        return stacked[perm]

    def expand(self, coeffs, side: int, s) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate ``(u, du/dn)`` of the expansion with coefficients ``[Dirichlet, Neumann]``."""
        coeffs = np.asarray(coeffs)
        B = self.evaluate(side, s)
        ns = self.n_scalar
        return B @ coeffs[:ns], B @ coeffs[ns:]

    def summary(self) -> dict:
        out = {"N": self.N, "n_bb": self.n_bb, "kind": self.kind,
               "dof_per_lambda1": self.dof_per_lambda1, "dof_per_lambda2": self.dof_per_lambda2}
        out.update(self.meta)
        return out


def eval_basis(space: ApproximationSpace, b: BasisFunction, x: BoundaryPoint) -> complex:
    """Value of a single basis function at a boundary point (zero off its support)."""
    if x.side != b.side or not (b.s_a <= x.s <= b.s_b):
        return 0.0 + 0.0j
    xi = 2.0 * (x.s - b.s_a) / (b.s_b - b.s_a) - 1.0
    val = b.c * float(legendre(b.degree, xi))
    if b.corner is not None:
        r = np.hypot(*(x.position(space.polygon) - space.polygon.vertices[b.corner]))
        val = val * np.exp(1j * b.k_phase * r)
    return complex(val)


def _norm_constants(poly: ConvexPolygon, el: Element) -> np.ndarray:
    h = el.s_b - el.s_a
    if el.corner is None or abs(el.k_phase.imag) == 0:
        m = np.arange(el.degree + 1)
        return np.sqrt((2 * m + 1) / h)
    rule = gauss_legendre(el.degree + 40)
    s, w = rule.on_interval(el.s_a, el.s_b)
    x = poly.point(el.side, s) - poly.vertices[el.corner]
    weight = np.exp(-2.0 * el.k_phase.imag * np.hypot(x[:, 0], x[:, 1]))
    L = legendre_table(el.degree, rule.nodes)
    return 1.0 / np.sqrt((L * L * weight * w).sum(axis=1))


class _Builder:
    def __init__(self, poly: ConvexPolygon):
        self.poly = poly
        self.elements: list[Element] = []
        self.count = 0

    def add(self, side, s_a, s_b, degree, k_phase=0.0, corner=None, wavenumber=None):
        L = self.poly.lengths[side]
        if s_b - s_a < 1e-12 * L:
            raise ValueError("degenerate element")
        el = Element(int(side), float(s_a), float(s_b), int(degree), complex(k_phase),
                     corner, wavenumber, self.count)
        self.elements.append(el)
        self.count += degree + 1

    def norms(self) -> np.ndarray:
        return np.concatenate([_norm_constants(self.poly, el) for el in self.elements])


def _merge_points(pts, L, tol):
    out = []
    for x in sorted(pts):
        if x <= tol * L or x >= L - tol * L:
            continue
        if out and x - out[-1] <= tol * L:
            continue
        out.append(x)
    return out


def build_hna_space(problem: ScatteringProblem, strong_bbs=(), p: int = 3, c_np: float = 1.5,
                    sigma1: float = 0.17, sigma2: float = 0.15) -> ApproximationSpace:
    """HNA space for ``problem``.

    Parameters
    ----------
    strong_bbs : iterable of (corner, BoundaryPoint)
        Strong beam-boundary points with their corner provenance.
    """
    poly = problem.polygon
    ns = poly.n_sides
    n = layer_count(p, c_np)
    pv = degree_vector(p, n)
    meshes = {1: graded_mesh(n, sigma1).points, 2: graded_mesh(n, sigma2).points}
    ks = {1: complex(problem.k1), 2: problem.k2}
    b = _Builder(poly)
    n_bb = 0
    corner_meta = []
    for j in range(ns):
        prev = (j - 1) % ns
        cm = {"corner": j}
        for l in (1, 2):
            x = meshes[l]
            Lj, Lp = poly.lengths[j], poly.lengths[prev]
            for i in range(n):
                b.add(j, Lj * x[i], Lj * x[i + 1], pv[i], ks[l], j, l)
            for i in range(n):
                b.add(prev, Lp * (1 - x[i + 1]), Lp * (1 - x[i]), pv[i], ks[l], j, l)
            cm[f"graded_k{l}"] = (x * 1.0).tolist()
        far = {}
        for m in range(ns):
            if m in (j, prev):
                continue
            L = poly.lengths[m]
            ins = _merge_points([pt.s for c, pt in strong_bbs if c == j and pt.side == m], L, 1e-9)
            n_bb += len(ins)
            br = [0.0] + ins + [float(L)]
            for a, c in zip(br[:-1], br[1:]):
                b.add(m, a, c, p, ks[2], j, 2)
            far[m] = br
        cm["non_adjacent_meshes"] = {str(k): v for k, v in far.items()}
        corner_meta.append(cm)
    meta = {"p": p, "n_layers": n, "degree_vector": pv.tolist(), "sigma1": sigma1,
            "sigma2": sigma2, "corners": corner_meta}
    return ApproximationSpace(poly, b.elements, b.norms(), "hna", problem.k1, problem.k2, n_bb, meta)


def build_conventional_space(problem: ScatteringProblem, dof_per_lambda2: float, p: int = 3,
                             c_np: float = 1.5, sigma: float = 0.15,
                             p_corner: int | None = None) -> ApproximationSpace:
    """Phase-free piecewise Legendre space with corner grading.

    Each side receives ``round(dof_per_lambda2 * L_j / lambda2)`` scalar functions.
    The side is cut into equal macro elements; the two end elements are graded
    towards the corners (``n = ceil(c_np (pc+1))`` layers, linear-slope degrees
    up to ``pc = p_corner``, default ``p``),
    interior ones share the remaining budget with degrees differing by at most
    one (never above ``p``).
    """
    if not dof_per_lambda2 > 0:
        raise ValueError("dof_per_lambda2 must be positive")
    poly = problem.polygon
    pc = p if p_corner is None else p_corner
    n = layer_count(pc, c_np)
    pv = degree_vector(pc, n)
    g = graded_mesh(n, sigma).points
    cost_graded = int(np.sum(pv + 1))
    b = _Builder(poly)
    budgets = []
    for j in range(poly.n_sides):
        L = poly.lengths[j]
        budget = int(round(dof_per_lambda2 * L / problem.lambda2))
        budgets.append(budget)
        rest = max(budget - 2 * cost_graded, 0)
        n_mid = -(-rest // (p + 1))
        n_macro = 2 + n_mid
        h = L / n_macro
        for i in range(n):
            b.add(j, h * g[i], h * g[i + 1], pv[i])
        if n_mid:
            base, extra = divmod(rest, n_mid)
            for e in range(1, n_macro - 1):
                b.add(j, e * h, (e + 1) * h, base - 1 + (1 if e <= extra else 0))
        for i in range(n):
            b.add(j, L - h * g[i + 1], L - h * g[i], pv[i])
    meta = {"p": p, "p_corner": pc, "n_layers": n, "degree_vector": pv.tolist(), "sigma": sigma,
            "budgets": budgets, "target_dof_per_lambda2": dof_per_lambda2}
    return ApproximationSpace(poly, b.elements, b.norms(), "conventional", problem.k1, problem.k2, 0, meta)
