"""The transmission problem: polygon, wavenumbers, transmission parameter, incident wave."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConvexPolygon


def resolve_alpha(alpha, mu: complex) -> complex:
    """Turn an alpha specification (``"unity"``, ``"inv_mu_sq"`` or a number) into a value."""
    if isinstance(alpha, str):
        if alpha == "unity":
            return 1.0 + 0.0j
        if alpha == "inv_mu_sq":
            return complex(1.0 / (mu * mu))
        raise ValueError(f"unknown alpha mode {alpha!r}")
    return complex(alpha)


@dataclass(frozen=True)
class ScatteringProblem:
    """Plane-wave transmission problem for a penetrable convex polygon.

    The exterior wavenumber is ``k1``; inside, ``k2 = mu * k1``. The transmission
    conditions are ``u1 = u2`` and ``du1/dn = alpha du2/dn`` on the boundary.

    Attributes
    ----------
    polygon : ConvexPolygon
    k1 : float
        Exterior wavenumber, positive.
    mu : complex
        Refractive index with ``Re mu > 0`` and ``Im mu >= 0``.
    alpha : complex
        Transmission parameter with ``Im alpha <= 0`` and ``Im(alpha k2^2) >= 0``.
    d_inc : ndarray
        Unit propagation direction of the incident wave ``exp(i k1 d.x)``.
    """

    polygon: ConvexPolygon
    k1: float
    mu: complex
    alpha: complex
    d_inc: np.ndarray

    def __post_init__(self):
        k1 = float(self.k1)
        mu = complex(self.mu)
        alpha = complex(self.alpha)
        d = np.asarray(self.d_inc, dtype=float).reshape(2)
        if not k1 > 0:
            raise ValueError("k1 must be positive")
        if mu.imag < 0:
            raise ValueError("Im(mu) must be ≥ 0")
        if not mu.real > 0:
            raise ValueError("Re(mu) must be > 0")
        if alpha == 0:
            raise ValueError("alpha must be non-zero")
        if alpha.imag > 1e-14 * abs(alpha):
            raise ValueError("Im(alpha) must be ≤ 0")
        k2 = mu * k1
        if (alpha * k2 * k2).imag < -1e-12 * abs(alpha * k2 * k2):
            raise ValueError("Im(alpha k2^2) must be ≥ 0")
        nd = math.hypot(d[0], d[1])
        if abs(nd - 1) > 1e-12:
            raise ValueError("incident direction must be a unit vector")
        d = d / nd
        d.setflags(write=False)
        object.__setattr__(self, "k1", k1)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "d_inc", d)

    @classmethod
    def from_angle(cls, polygon: ConvexPolygon, k1: float, mu: complex, theta: float,
                   alpha="unity") -> "ScatteringProblem":
        """Incident direction ``(cos theta, -sin theta)``."""
        return cls(polygon, k1, mu, resolve_alpha(alpha, complex(mu)),
                   np.array([math.cos(theta), -math.sin(theta)]))

    @property
    def k2(self) -> complex:
        return self.mu * self.k1

    @property
    def lambda1(self) -> float:
        return 2 * math.pi / self.k1

    @property
    def lambda2(self) -> float:
        return 2 * math.pi / self.k2.real

    @property
    def k_max(self) -> float:
        return max(self.k1, abs(self.k2))

    def incident(self, x):
        """Incident field and its gradient at points ``x`` (shape (..., 2))."""
        x = np.asarray(x, dtype=float)
        u = np.exp(1j * self.k1 * (x @ self.d_inc))
        return u, 1j * self.k1 * u[..., None] * self.d_inc
