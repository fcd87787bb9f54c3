"""Special functions and quadrature primitives.

Hankel functions of the first kind (orders 0 and 1) for complex arguments
with ``Re z > 0`` and ``Im z >= 0``, Legendre polynomials, and Gauss-Legendre
rules.

For ``|z| >= ASYMPTOTIC_RADIUS`` the Hankel functions are evaluated from the
large-argument expansion

    H_nu(z) ~ sqrt(2/(pi z)) exp(i(z - nu pi/2 - pi/4)) sum_k i^k a_k(nu) / z^k,

    a_k(nu) = prod_{m=1}^{k} (4 nu^2 - (2m-1)^2) / (k! 8^k),

summed until the terms stop decreasing. Below the switchover the AMOS
routines shipped with scipy are used; both branches are checked against an
independent multiprecision oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np
from scipy import special as sps

ASYMPTOTIC_RADIUS = 17.0

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


_PHASE = np.exp(-0.25j * np.pi)


@numba.njit(cache=True)
def _hankel01_asym_scalar(z):
    # exp(-i pi/4) is applied separately so that no rounding enters the phase
    pref = _SQRT_2_OVER_PI / np.sqrt(z) * np.exp(1j * z) * _PHASE
    inv = 1.0 / z
    s0 = 1.0 + 0.0j
    s1 = 1.0 + 0.0j
    t0 = 1.0 + 0.0j
    t1 = 1.0 + 0.0j
    prev0 = 1.0
    prev1 = 1.0
    for k in range(1, 80):
        c = (2.0 * k - 1.0) ** 2
        f = 1j * inv / (8.0 * k)
        t0 = -c * f * t0
        t1 = (4.0 - c) * f * t1
        a0 = t0.real * t0.real + t0.imag * t0.imag
        a1 = t1.real * t1.real + t1.imag * t1.imag
        if a0 > prev0:
            break
        s0 += t0
        s1 += t1
        prev0 = a0
        prev1 = a1
        if a0 < 1e-34 and a1 < 1e-34:
            break
    # H1 carries an extra factor exp(-i pi/2) = -i
    return pref * s0, -1j * pref * s1


@numba.njit(cache=True)
def _hankel01_asym(z, h0, h1):
    for i in range(z.size):
        a, b = _hankel01_asym_scalar(z[i])
        h0[i] = a
        h1[i] = b


def hankel1_01(z):
    """Return ``(H_0^(1)(z), H_1^(1)(z))`` elementwise.

    Raises
    ------
    ValueError
        If any argument is zero.
    """
    z = np.asarray(z, dtype=np.complex128)
    shape = z.shape
    zf = np.ascontiguousarray(z.ravel())
    if np.any(zf == 0):
        raise ValueError("Hankel function evaluated at z = 0 (logarithmic singularity)")
    h0 = np.empty_like(zf)
    h1 = np.empty_like(zf)
    big = np.abs(zf) >= ASYMPTOTIC_RADIUS
    if big.all():
        _hankel01_asym(zf, h0, h1)
    else:
        if big.any():
            zb = np.ascontiguousarray(zf[big])
            b0 = np.empty_like(zb)
            b1 = np.empty_like(zb)
            _hankel01_asym(zb, b0, b1)
            h0[big] = b0
            h1[big] = b1
        small = ~big
        zs = zf[small]
        if np.all(zs.imag == 0):
            x = zs.real
            h0[small] = sps.j0(x) + 1j * sps.y0(x)
            h1[small] = sps.j1(x) + 1j * sps.y1(x)
        else:
            h0[small] = sps.hankel1(0, zs)
            h1[small] = sps.hankel1(1, zs)
    return h0.reshape(shape), h1.reshape(shape)


def hankel1_0(z):
    """Hankel function of the first kind, order 0."""
    h0, _ = hankel1_01(z)
    return h0[()] if np.ndim(h0) == 0 else h0


def hankel1_1(z):
    """Hankel function of the first kind, order 1."""
    _, h1 = hankel1_01(z)
    return h1[()] if np.ndim(h1) == 0 else h1


def legendre(m: int, x):
    """Legendre polynomial L_m evaluated by the three-term recurrence."""
    if m < 0:
        raise ValueError("Legendre degree must be non-negative")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if m == 0:
        return p_prev
    p = x.copy()
    for n in range(1, m):
        p_prev, p = p, ((2 * n + 1) * x * p - n * p_prev) / (n + 1)
    return p


def legendre_table(m_max: int, x) -> np.ndarray:
    """All Legendre polynomials L_0..L_{m_max} at ``x``; shape (m_max+1, *x.shape)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((m_max + 1,) + x.shape)
    out[0] = 1.0
    if m_max >= 1:
        out[1] = x
    for n in range(1, m_max):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1].

    Attributes
    ----------
    nodes : ndarray
        Strictly increasing nodes in (-1, 1).
    weights : ndarray
        Positive weights summing to 2.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    def on_interval(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights mapped affinely onto [a, b]."""
        h = 0.5 * (b - a)
        return a + h * (self.nodes + 1.0), h * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule computed by Newton iteration on L_n."""
    if n < 1:
        raise ValueError("Gauss-Legendre rule needs n >= 1")
    m = (n + 1) // 2
    i = np.arange(1, m + 1)
    # Tricomi initial guesses
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5)) * (1.0 - (n - 1) / (8.0 * n**3))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(1, n):
            p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    nodes = np.concatenate([-x, x[::-1][n % 2:]])
    weights = np.concatenate([w, w[::-1][n % 2:]])
    if n % 2 == 1:
        nodes[m - 1] = 0.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)
