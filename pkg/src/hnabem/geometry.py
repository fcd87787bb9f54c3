"""Convex polygonal scatterers.

Sides and corners are indexed from 0. Side ``j`` runs from corner ``P_j`` to
``P_{j+1}`` (indices mod ``n_s``) and is parametrised by arclength
``s in [0, L_j]``. Corners are owned by the side that starts at them, so a
boundary function stored per side may take two values at a corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Region(str, Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ConvexPolygon:
    """Anti-clockwise strictly convex polygon.

    Attributes
    ----------
    vertices : ndarray, shape (n_s, 2)
        Corners P_0 ... P_{n_s-1}.
    tangents, normals : ndarray, shape (n_s, 2)
        Unit tangent of side j (from P_j to P_{j+1}) and outward unit normal.
    lengths : ndarray, shape (n_s,)
        Side lengths L_j.
    offsets : ndarray, shape (n_s + 1,)
        Global arclength at the start of each side; ``offsets[-1]`` is the
        perimeter.
    """

    vertices: np.ndarray
    tangents: np.ndarray = field(init=False, repr=False)
    normals: np.ndarray = field(init=False, repr=False)
    lengths: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        n = v.shape[0]
        if n < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= 0):
            raise ValueError("vertices must be distinct (zero-length side)")
        scale = lengths.max()
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
        area2 = np.sum(v[:, 0] * np.roll(v, -1, axis=0)[:, 1] - np.roll(v, -1, axis=0)[:, 0] * v[:, 1])
        if area2 <= 0:
            raise ValueError("vertices must be ordered anti-clockwise")
        if np.any(cross <= 1e-12 * scale * scale):
            raise ValueError("polygon is not strictly convex")
        t = edges / lengths[:, None]
        nrm = np.column_stack([t[:, 1], -t[:, 0]])
        offsets = np.concatenate([[0.0], np.cumsum(lengths)])
        for name, arr in [("vertices", v), ("tangents", t), ("normals", nrm),
                          ("lengths", lengths), ("offsets", offsets)]:
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_sides(self) -> int:
        return self.vertices.shape[0]

    @property
    def perimeter(self) -> float:
        return float(self.offsets[-1])

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        a = 0.5 * c.sum()
        return np.array([((v[:, 0] + w[:, 0]) * c).sum(), ((v[:, 1] + w[:, 1]) * c).sum()]) / (6 * a)

    @property
    def circumradius(self) -> float:
        return float(np.max(np.hypot(*(self.vertices - self.centroid).T)))

    @property
    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.max(np.hypot(d[..., 0], d[..., 1])))

    def corner(self, j: int) -> np.ndarray:
        return self.vertices[j % self.n_sides]

    def point(self, side: int, s):
        """Cartesian position of arclength ``s`` (scalar or array) on ``side``."""
        s = np.asarray(s, dtype=float)
        return self.vertices[side] + s[..., None] * self.tangents[side]

    def interior_angle(self, j: int) -> float:
        a = self.tangents[(j - 1) % self.n_sides]
        b = self.tangents[j]
        return math.pi - math.atan2(a[0] * b[1] - a[1] * b[0], a @ b)

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "ConvexPolygon":
        if "vertices" in obj:
            return cls(np.asarray(obj["vertices"], dtype=float))
        if "regular" in obj:
            r = obj["regular"]
            return make_regular_polygon(int(r["n_sides"]), float(r["side_length"]),
                                        rotation=float(r.get("rotation", 0.0)),
                                        center=tuple(r.get("center", (0.0, 0.0))))
        raise ValueError("polygon JSON needs 'vertices' or 'regular'")


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary given by side index and arclength on that side."""

    side: int
    s: float

    def validate(self, poly: ConvexPolygon) -> None:
        if not 0 <= self.side < poly.n_sides:
            raise IndexError(f"side index {self.side} out of range")
        if not -1e-12 <= self.s <= poly.lengths[self.side] * (1 + 1e-12):
            raise ValueError(f"arclength {self.s} outside [0, {poly.lengths[self.side]}]")

    def position(self, poly: ConvexPolygon) -> np.ndarray:
        self.validate(poly)
        return poly.point(self.side, self.s)

    def global_arclength(self, poly: ConvexPolygon) -> float:
        self.validate(poly)
        return float(poly.offsets[self.side] + self.s)


def make_regular_polygon(n_sides: int, side_length: float, rotation: float = 0.0,
                         center: tuple[float, float] = (0.0, 0.0)) -> ConvexPolygon:
    """Regular polygon centred at ``center``.

    With ``rotation = 0`` the polygon has a horizontal bottom side: the first
    vertex sits at polar angle ``-pi/2 + pi/n_sides``. For the triangle this puts
    side 0 on the right and side 2 along the bottom.
    """
    if n_sides < 3:
        raise ValueError("n_sides must be >= 3")
    if not side_length > 0:
        raise ValueError("side_length must be positive")
    r = side_length / (2 * math.sin(math.pi / n_sides))
    ang = -0.5 * math.pi + math.pi / n_sides + rotation + 2 * math.pi * np.arange(n_sides) / n_sides
    v = np.column_stack([r * np.cos(ang), r * np.sin(ang)]) + np.asarray(center, dtype=float)
    return ConvexPolygon(v)


def corner_distance(poly: ConvexPolygon, j: int, x: BoundaryPoint | np.ndarray) -> float:
    """Distance r_j(x) = |x - P_j|."""
    if not 0 <= j < poly.n_sides:
        raise IndexError(f"corner index {j} out of range")
    if isinstance(x, BoundaryPoint):
        x = x.position(poly)
    d = np.asarray(x, dtype=float) - poly.vertices[j]
    return float(np.hypot(d[0], d[1]))


def boundary_distance(poly: ConvexPolygon, x) -> np.ndarray:
    """Euclidean distance from each point of ``x`` (shape (..., 2)) to the boundary."""
    x = np.asarray(x, dtype=float)
    rel = x[..., None, :] - poly.vertices
    s = np.einsum("...jk,jk->...j", rel, poly.tangents)
    s = np.clip(s, 0.0, poly.lengths)
    foot = poly.vertices + s[..., None] * poly.tangents
    d = x[..., None, :] - foot
    return np.min(np.hypot(d[..., 0], d[..., 1]), axis=-1)


def locate_many(poly: ConvexPolygon, x, delta: float | None = None) -> np.ndarray:
    """Vectorised ``locate``; returns an array of :class:`Region` values as strings."""
    if delta is None:
        delta = 1e-10 * poly.circumradius
    x = np.asarray(x, dtype=float)
    side = np.einsum("...jk,jk->...j", x[..., None, :] - poly.vertices, poly.normals)
    inside = np.all(side < 0, axis=-1)
    near = boundary_distance(poly, x) <= delta
    out = np.where(inside, Region.INTERIOR.value, Region.EXTERIOR.value).astype(object)
    out[near] = Region.BOUNDARY.value
    return out


def locate(poly: ConvexPolygon, x, delta: float | None = None) -> Region:
    """Classify a point as interior, exterior or boundary (within ``delta`` of the boundary)."""
    return Region(locate_many(poly, np.asarray(x, dtype=float)[None, :], delta)[0])
