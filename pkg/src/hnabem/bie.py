"""Boundary-integral kernels, layer potentials and the far-field integrand.

With ``R = x - y``, ``r = |R|`` and ``Phi_k(r) = (i/4) H_0(k r)``,

    Phi'  = -(i k / 4) H_1(k r),
    Phi'' = -(i k^2 / 4) (H_0(k r) - H_1(k r) / (k r)),

the operator blocks of the transmission system act through

    K11 = alpha D_2 - D_1 = -(R.n_y / r) [(alpha - 1) Phi_2' + g'],
    K12 = S_1 - S_2       = -g,
    K21 = alpha (H_2 - H_1)
        = -alpha [ (R.n_x)(R.n_y)/r^2 (g'' - g'/r) + (n_x.n_y) g'/r ],
    K22 = alpha D_1' - D_2' = (R.n_x / r) [(alpha - 1) Phi_1' - g'],

where ``g = Phi_2 - Phi_1``. The difference ``g`` is smooth up to a
``r^2 log r`` term, so for ``k_max r < SERIES_CUTOFF`` it is evaluated from
its ascending series

    g(r) = sum_m r^(2m) (a_m - b_m log r),

which removes the cancellation between the two hypersingular kernels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np

from .geometry import BoundaryPoint
from .problem import ScatteringProblem
from .specfun import gauss_legendre, hankel1_01

log = logging.getLogger(__name__)

SERIES_CUTOFF = 0.1
SERIES_TERMS = 5
NEAR_GUARD = 1e-3

KINDS = ("S", "D", "Dprime", "Hdiff")


@dataclass(frozen=True)
class KernelId:
    kind: str
    medium: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "Hdiff":
            if self.medium is not None:
                raise ValueError("Hdiff spans both media")
        elif self.medium not in (1, 2):
            raise ValueError("medium must be 1 or 2")


def series_coefficients(k1: complex, k2: complex, terms: int = SERIES_TERMS) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients ``a_m, b_m`` of ``g(r) = Phi_2 - Phi_1 = sum r^(2m) (a_m - b_m log r)``."""
    a = np.zeros(terms, complex)
    b = np.zeros(terms, complex)
    harm = 0.0
    for m in range(terms):
        if m > 0:
            harm += 1.0 / m
        tm = []
        for k in (k1, k2):
            k = complex(k)
            t = (-1) ** m * (k / 2) ** (2 * m) / math.factorial(m) ** 2
            A = 0.25j - (np.log(k / 2) + np.euler_gamma) / (2 * np.pi)
            tm.append((t, t * (A + harm / (2 * np.pi))))
        a[m] = tm[1][1] - tm[0][1]
        b[m] = (tm[1][0] - tm[0][0]) / (2 * np.pi)
    return a, b


@numba.njit(cache=True)
def _combine(r, rnx, rny, nxny, h01, h11, h02, h12, k1, k2, alpha, sa, sb, cutoff,
             o11, o12, o21, o22):
    kmax = max(abs(k1), abs(k2))
    for i in range(r.size):
        ri = r[i]
        d1 = -0.25j * k1 * h11[i]
        d2 = -0.25j * k2 * h12[i]
        if kmax * ri < cutoff:
            lr = np.log(ri)
            g = 0j
            gp_r = 0j
            g2 = 0j
            r2 = ri * ri
            pw = 1.0
            for m in range(sa.size):
                am = sa[m] - sb[m] * lr
                g += pw * am
                if m >= 1:
                    # pw currently r^(2m); r^(2m-2) = pw / r2
                    q = pw / r2
                    gp_r += q * (2 * m * am - sb[m])
                    g2 += q * (2 * m * (2 * m - 2) * am - (4 * m - 2) * sb[m])
                pw *= r2
            gp = gp_r * ri
        else:
            g = 0.25j * (h02[i] - h01[i])
            gp = d2 - d1
            gp_r = gp / ri
            p1 = -0.25j * k1 * k1 * (h01[i] - h11[i] / (k1 * ri))
            p2 = -0.25j * k2 * k2 * (h02[i] - h12[i] / (k2 * ri))
            g2 = (p2 - p1) - gp_r
        o11[i] = -(rny[i] / ri) * ((alpha - 1.0) * d2 + gp)
        o12[i] = -g
        o21[i] = -alpha * ((rnx[i] * rny[i]) / (ri * ri) * g2 + nxny[i] * gp_r)
        o22[i] = (rnx[i] / ri) * ((alpha - 1.0) * d1 - gp)


def block_kernels(problem: ScatteringProblem, x, nx, sx, y, ny, sy, outer: bool = True,
                  allow_coincident: bool = False):
    """The four combined kernels ``K11, K12, K21, K22`` for point pairs.

    With ``outer=True`` the result has shape ``(len(x), len(y))``; otherwise the
    inputs are paired elementwise. ``sx``/``sy`` are side indices: pairs on the
    same side have their normal projections set to zero exactly. Coincident
    pairs raise unless ``allow_coincident``, in which case they are set to 0.
    """
    if outer:
        R = x[:, None, :] - y[None, :, :]
        same = sx[:, None] == sy[None, :]
        rnx = np.einsum("ijk,ik->ij", R, nx)
        rny = np.einsum("ijk,jk->ij", R, ny)
        nxny = np.broadcast_to(nx @ ny.T, same.shape)
    else:
        R = x - y
        same = sx == sy
        rnx = np.einsum("ik,ik->i", R, nx)
        rny = np.einsum("ik,ik->i", R, ny)
        nxny = np.einsum("ik,ik->i", nx, ny)
    r = np.hypot(R[..., 0], R[..., 1])
    zero = r == 0
    if zero.any():
        if not allow_coincident:
            raise ValueError("coincident points in kernel evaluation")
        r = np.where(zero, 1.0, r)
    rnx = np.where(same, 0.0, rnx)
    rny = np.where(same, 0.0, rny)
    shape = r.shape
    r = r.ravel()
    k1, k2 = complex(problem.k1), problem.k2
    h01, h11 = hankel1_01(k1 * r)
    h02, h12 = hankel1_01(k2 * r)
    sa, sb = series_coefficients(k1, k2)
    outs = [np.empty(r.size, complex) for _ in range(4)]
    _combine(r, np.ascontiguousarray(rnx).ravel(), np.ascontiguousarray(rny).ravel(),
             np.ascontiguousarray(nxny).ravel(), h01, h11, h02, h12, k1, k2, complex(problem.alpha),
             sa, sb, SERIES_CUTOFF, *outs)
    outs = [o.reshape(shape) for o in outs]
    if zero.any():
        for o in outs:
            o[zero] = 0.0
    return tuple(outs)


def _wavenumber(problem: ScatteringProblem, medium: int) -> complex:
    if medium == 1:
        return complex(problem.k1)
    if medium == 2:
        return problem.k2
    raise ValueError("medium must be 1 or 2")


def fundamental(medium: int, x, y, problem: ScatteringProblem):
    """``Phi_j(x, y) = (i/4) H_0(k_j |x - y|)``; broadcasts over leading dimensions."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.hypot(d[..., 0], d[..., 1])
    if np.any(r == 0):
        raise ValueError("fundamental solution is singular at x = y")
    h0, _ = hankel1_01(_wavenumber(problem, medium) * r)
    out = 0.25j * h0
    return out[()] if np.ndim(out) == 0 else out


def hdiff_direct(r, rnx, rny, nxny, k1, k2):
    """``d^2/dn_x dn_y (Phi_2 - Phi_1)`` by direct subtraction of Hankel closed forms."""
    r = np.asarray(r, dtype=float)
    h01, h11 = hankel1_01(k1 * r)
    h02, h12 = hankel1_01(k2 * r)
    gp = -0.25j * k2 * h12 + 0.25j * k1 * h11
    p1 = -0.25j * k1 * k1 * (h01 - h11 / (k1 * r))
    p2 = -0.25j * k2 * k2 * (h02 - h12 / (k2 * r))
    return -(p2 - p1) * rnx * rny / r**2 - gp * (nxny / r - rnx * rny / r**3)


def hdiff_series(r, rnx, rny, nxny, k1, k2, terms: int = SERIES_TERMS):
    """Same kernel from the ascending series of ``Phi_2 - Phi_1``."""
    r = np.asarray(r, dtype=float)
    a, b = series_coefficients(k1, k2, terms)
    lr = np.log(r)
    gp_r = 0.0
    g2 = 0.0
    for m in range(1, terms):
        am = a[m] - b[m] * lr
        q = r ** (2 * m - 2)
        gp_r = gp_r + q * (2 * m * am - b[m])
        g2 = g2 + q * (2 * m * (2 * m - 2) * am - (4 * m - 2) * b[m])
    return -(rnx * rny / r**2 * g2 + nxny * gp_r)


def kernel(kid: KernelId, x: BoundaryPoint, y: BoundaryPoint, problem: ScatteringProblem) -> complex:
    """Pointwise kernel of S, D, D' (medium 1 or 2) or of H_2 - H_1."""
    poly = problem.polygon
    px, py = x.position(poly), y.position(poly)
    R = px - py
    r = math.hypot(R[0], R[1])
    if r == 0:
        raise ValueError("kernel evaluated at coincident points")
    nx, ny = poly.normals[x.side], poly.normals[y.side]
    same = x.side == y.side
    rnx = 0.0 if same else float(R @ nx)
    rny = 0.0 if same else float(R @ ny)
    if kid.kind == "Hdiff":
        k1, k2 = complex(problem.k1), problem.k2
        args = (np.array([r]), rnx, rny, float(nx @ ny), k1, k2)
        if max(abs(k1), abs(k2)) * r < SERIES_CUTOFF:
            return complex(hdiff_series(*args)[0])
        return complex(hdiff_direct(*args)[0])
    k = _wavenumber(problem, kid.medium)
    h0, h1 = hankel1_01(np.array([k * r]))
    if kid.kind == "S":
        return complex(0.25j * h0[0])
    dphi = -0.25j * k * h1[0]
    if kid.kind == "D":
        return complex(-dphi * rny / r)
    return complex(dphi * rnx / r)


def far_field_integrand(xhat, y: BoundaryPoint, v: tuple[complex, complex], problem: ScatteringProblem) -> complex:
    """``-exp(-i k1 xhat.y) (i k1 (xhat.n) u + du/dn)`` at a boundary point."""
    xhat = np.asarray(xhat, dtype=float)
    if abs(math.hypot(*xhat) - 1) > 1e-12:
        raise ValueError("xhat must be a unit vector")
    poly = problem.polygon
    py = y.position(poly)
    n = poly.normals[y.side]
    k1 = problem.k1
    u, q = v
    return complex(-np.exp(-1j * k1 * (xhat @ py)) * (1j * k1 * (xhat @ n) * u + q))


# ---------------------------------------------------------------------------
# layer potentials off the boundary

BoundaryDensity = Callable[[int, np.ndarray], np.ndarray]


@dataclass
class PotentialValues:
    """Potential values with a per-point flag for near-singular evaluation."""

    values: np.ndarray
    degraded: np.ndarray


def boundary_panels(problem: ScatteringProblem, breakpoints=None, h_max: float | None = None):
    """Panels (side, a, b) covering the boundary, split at given breakpoints."""
    poly = problem.polygon
    if h_max is None:
        h_max = 0.5 * min(problem.lambda1, problem.lambda2)
    out = []
    for j in range(poly.n_sides):
        L = float(poly.lengths[j])
        br = [0.0, L]
        if breakpoints is not None:
            br += [float(b) for b in breakpoints(j)]
        br = np.unique(np.clip(br, 0.0, L))
        for a, b in zip(br[:-1], br[1:]):
            if b - a <= 1e-14 * L:
                continue
            m = max(1, int(math.ceil((b - a) / h_max)))
            e = np.linspace(a, b, m + 1)
            out += [(j, e[i], e[i + 1]) for i in range(m)]
    return out


def _segment_distance(p, a, b):
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    d = p - (a + t[..., None] * ab) if np.ndim(t) else p - (a + t * ab)
    return np.hypot(d[..., 0], d[..., 1])


def eval_potential(kind: str, medium: int, density: BoundaryDensity, x, problem: ScatteringProblem,
                   tol: float = 1e-8, breakpoints=None, n_gauss: int = 16) -> PotentialValues:
    """Single- or double-layer potential of ``density`` at points ``x`` off the boundary.

    Composite Gauss quadrature on panels no longer than half a wavelength;
    panels closer to a target than their own length are bisected recursively
    for that target. Targets within ``NEAR_GUARD`` times the local panel
    length of the boundary are flagged as degraded.

    Parameters
    ----------
    kind : {"single", "double"}
    density : callable ``(side, s) -> values``
    breakpoints : callable ``side -> iterable of s``, optional
        Points where the density is not smooth.
    """
    if kind not in ("single", "double"):
        raise ValueError("kind must be 'single' or 'double'")
    poly = problem.polygon
    k = _wavenumber(problem, medium)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rule = gauss_legendre(n_gauss)
    panels = boundary_panels(problem, breakpoints)
    # the panel length controls the Gauss error through the ratio distance / length,
    # so the tolerance only sets how deep the bisection may go
    max_depth = int(min(60, max(10, -math.log2(max(tol, 1e-16)) + 10)))
    vals = np.zeros(x.shape[0], complex)
    degraded = np.zeros(x.shape[0], bool)

    def integrate(j, a, b, pts):
        s, w = rule.on_interval(a, b)
        y = poly.point(j, s)
        f = density(j, s) * w
        d = pts[:, None, :] - y[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        h0, h1 = hankel1_01(k * r)
        if kind == "single":
            ker = 0.25j * h0
        else:
            # dPhi/dn_y = (i k / 4) H_1(k r) (R.n_y) / r
            ker = 0.25j * k * h1 * (d @ poly.normals[j]) / r
        return ker @ f

    for j, a, b in panels:
        pa, pb = poly.point(j, a), poly.point(j, b)
        dist = _segment_distance(x, pa, pb)
        h = b - a
        far = dist >= h
        if far.any():
            vals[far] += integrate(j, a, b, x[far])
        for i in np.nonzero(~far)[0]:
            if dist[i] < NEAR_GUARD * h:
                degraded[i] = True
            stack = [(a, b, 0)]
            while stack:
                aa, bb, depth = stack.pop()
                hh = bb - aa
                dd = _segment_distance(x[i], poly.point(j, aa), poly.point(j, bb))
                if dd >= hh or depth >= max_depth:
                    vals[i] += integrate(j, aa, bb, x[i:i + 1])[0]
                else:
                    mid = 0.5 * (aa + bb)
                    stack += [(aa, mid, depth + 1), (mid, bb, depth + 1)]
    if degraded.any():
        log.warning("%d evaluation points lie within the near-singular guard distance", degraded.sum())
    return PotentialValues(vals, degraded)
