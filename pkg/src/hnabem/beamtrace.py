"""Geometrical-optics beam tracing inside a penetrable convex polygon.

Waves are inhomogeneous plane waves ``a exp(i kappa.x)`` with complex wave
vector ``kappa = D d + i E e`` referenced to absolute coordinates. At an
interface point ``x0`` the tangential part of ``kappa`` is conserved and the
normal part of the transmitted wave vector is a complex square root,

    gamma_t^2 = k_to^2 - (kappa_i . t)^2,

whose real and imaginary parts give the usual radicals for ``D_t`` and
``E_t``. The branch is fixed by the sign rule: prefer ``d_t . n > 0`` (energy
flows away from the interface), unless that forces ``e_t . n < 0`` and
``|d_t . n| < tol_GO``, in which case ``e_t . n > 0`` (no growth) wins.

Beams are strips bounded by two rays parallel to ``d``. A beam leaving side
``j`` is clipped against the exit sides in the transverse coordinate
``c = x . d_perp``; each non-negligible footprint contributes its trace and
spawns an internally reflected beam.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundaryPoint, ConvexPolygon, Region, locate_many
from .problem import ScatteringProblem

log = logging.getLogger(__name__)

GENERATION_CAP = 60


@dataclass(frozen=True)
class MediumWave:
    """Plane wave ``a exp(i (D d + i E e).(x - x_ref))``.

    ``decays`` is False when ``E = 0``; ``e`` is then an arbitrary unit vector.
    ``x_ref`` defaults to the origin; strongly evanescent waves keep their
    amplitude at the interface point that created them so it stays finite.
    """

    a: complex
    D: float
    E: float
    d: np.ndarray
    e: np.ndarray
    decays: bool = True
    x_ref: np.ndarray | None = None

    @property
    def ref(self) -> np.ndarray:
        return np.zeros(2) if self.x_ref is None else np.asarray(self.x_ref, dtype=float)

    @property
    def kappa(self) -> np.ndarray:
        return self.D * np.asarray(self.d) + 1j * self.E * np.asarray(self.e)

    def value(self, x) -> np.ndarray:
        return self.a * np.exp(1j * ((np.asarray(x) - self.ref) @ self.kappa))

    def amplitude(self, x) -> np.ndarray:
        """Modulus ``|a| exp(-E e.(x - x_ref))``."""
        return abs(self.a) * np.exp(-self.E * ((np.asarray(x) - self.ref) @ np.asarray(self.e)))

    def scaled(self, c: complex) -> "MediumWave":
        return MediumWave(self.a * c, self.D, self.E, self.d, self.e, self.decays, self.x_ref)

    @classmethod
    def plane(cls, k: float, d, a: complex = 1.0) -> "MediumWave":
        d = np.asarray(d, dtype=float)
        return cls(complex(a), float(k), 0.0, d, d.copy(), False)


def interface_solve(inc: MediumWave, t, n, k_from: complex, k_to: complex, alpha: complex,
                    tol_go: float = 0.01, x0=None) -> tuple[MediumWave, MediumWave]:
    """Reflected and transmitted waves at a straight interface.

    Parameters
    ----------
    inc : MediumWave
        Wave in the first medium travelling towards the interface (``d.n > 0``).
    t, n : array_like
        Unit tangent and unit normal of the interface; ``n`` points into the
        second medium.
    k_from, k_to : complex
        Wavenumbers of the first and second medium.
    alpha : complex
        Transmission parameter: ``u_from = u_to`` and
        ``du_from/dn = alpha du_to/dn``.
    tol_go : float
        Threshold on ``|d_t . n|`` below which the no-growth branch is used when
        the two sign conditions conflict.
    x0 : array_like, optional
        A point on the interface; amplitudes are matched there and both
        outgoing waves are referenced to it. Defaults to the origin.
    """
    t = np.asarray(t, dtype=float)
    n = np.asarray(n, dtype=float)
    d_i = np.asarray(inc.d, dtype=float)
    e_i = np.asarray(inc.e, dtype=float)
    if not d_i @ n > 0:
        raise ValueError("incident wave must propagate towards the interface (d.n > 0)")
    k_to = complex(k_to)
    eta, xi = k_to.real, k_to.imag
    n_t = inc.D * (d_i @ t)
    k_t = inc.E * (e_i @ t) if inc.E > 0 else 0.0

    # gamma^2 = k_to^2 - (n_t + i k_t)^2; the stable complex root gives
    # |Re gamma| and |Im gamma|, equivalently the D_t, E_t radicals.
    a_re = eta * eta - xi * xi - n_t * n_t + k_t * k_t
    b_im = 2.0 * (eta * xi - n_t * k_t)
    g = np.sqrt(complex(a_re, b_im))
    g_re, g_im = abs(g.real), abs(g.imag)
    D_t = math.hypot(n_t, g_re)
    E_t = math.hypot(k_t, g_im)
    scale = eta * eta + xi * xi + n_t * n_t + k_t * k_t

    nu_d = g_re / D_t
    tau_d = n_t / D_t
    if E_t > 0:
        nu_e = g_im / E_t
        tau_e = k_t / E_t
    else:
        nu_e = 0.0
        tau_e = 0.0
    conflict = b_im < -1e-14 * scale and g_re > 0 and g_im > 0
    if conflict:
        if nu_d < tol_go:
            nu_d = -nu_d
        else:
            nu_e = -nu_e
    d_t = tau_d * t + nu_d * n
    d_t = d_t / np.hypot(*d_t)
    if E_t > 0:
        e_t = tau_e * t + nu_e * n
        e_t = e_t / np.hypot(*e_t)
        decays = True
    else:
        e_t = n.copy()
        decays = False

    gamma_i = inc.D * (d_i @ n) + 1j * inc.E * (e_i @ n)
    gamma_t = D_t * (d_t @ n) + 1j * E_t * (e_t @ n)
    den = gamma_i + alpha * gamma_t
    R = (gamma_i - alpha * gamma_t) / den
    T = 2.0 * gamma_i / den

    d_r = d_i - 2.0 * (d_i @ n) * n
    e_r = e_i - 2.0 * (e_i @ n) * n
    x0 = np.zeros(2) if x0 is None else np.asarray(x0, dtype=float)
    a_0 = inc.value(x0)
    refl = MediumWave(complex(a_0 * R), inc.D, inc.E, d_r, e_r, inc.decays, x0)
    trans = MediumWave(complex(a_0 * T), D_t, E_t, d_t, e_t, decays, x0)
    return refl, trans


@dataclass(frozen=True)
class BeamEdge:
    """Bounding ray of a beam: base point on the boundary and corner provenance."""

    base: np.ndarray
    corner: int | None


@dataclass(frozen=True)
class Beam:
    wave: MediumWave
    medium: str
    side: int
    s_range: tuple[float, float]
    edges: tuple[BeamEdge, BeamEdge]
    generation: int


@dataclass
class TraceSegment:
    """Closed-form trace on ``[s_a, s_b]`` of one side.

    ``u = sum_m a_m exp(i kappa_m.(x - r_m))`` and
    ``dudn = sum_m f_m i (kappa_m.n) a_m exp(i kappa_m.(x - r_m))``.
    """

    side: int
    s_a: float
    s_b: float
    amps: np.ndarray
    kappas: np.ndarray
    factors: np.ndarray
    refs: np.ndarray | None = None

    def evaluate(self, x, normal) -> tuple[np.ndarray, np.ndarray]:
        shift = 0.0 if self.refs is None else np.einsum("mi,mi->m", self.refs, self.kappas)
        ph = np.exp(1j * (x @ self.kappas.T - shift)) * self.amps
        u = ph.sum(axis=-1)
        dudn = (ph * (1j * (self.kappas @ normal) * self.factors)).sum(axis=-1)
        return u, dudn


@dataclass(frozen=True)
class BeamBoundaryPoint:
    point: BoundaryPoint
    amplitude: float
    corner: int | None
    generation: int


@dataclass
class GOField:
    """Geometrical-optics trace on the boundary, stored per side."""

    problem: ScatteringProblem
    segments: list[list[TraceSegment]]
    beam_boundary_points: list[BeamBoundaryPoint]
    beam_count: int
    beams: list[Beam] = field(default_factory=list, repr=False)
    capped: bool = False
    exterior_beams: list[Beam] = field(default_factory=list, repr=False)

    def evaluate(self, side: int, s, limit: str = "right") -> tuple[np.ndarray, np.ndarray]:
        """GO trace ``(u, du/dn)`` at arclengths ``s`` on ``side``.

        At a segment endpoint the value is the limit from the ``right``
        (increasing s) or ``left``; at the ends of the side the one-sided
        value inside the side is returned.
        """
        poly = self.problem.polygon
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L = poly.lengths[side]
        x = poly.point(side, s)
        nrm = poly.normals[side]
        u = np.zeros(s.shape, complex)
        q = np.zeros(s.shape, complex)
        for seg in self.segments[side]:
            if limit == "right":
                m = (s >= seg.s_a) & ((s < seg.s_b) | ((seg.s_b >= L) & (s <= seg.s_b)))
            elif limit == "left":
                m = (s <= seg.s_b) & ((s > seg.s_a) | ((seg.s_a <= 0) & (s >= seg.s_a)))
            else:
                raise ValueError("limit must be 'left' or 'right'")
            if m.any():
                a, b = seg.evaluate(x[m], nrm)
                u[m] += a
                q[m] += b
        return u, q

    def breakpoints(self, side: int) -> np.ndarray:
        L = float(self.problem.polygon.lengths[side])
        pts = [0.0, L]
        for seg in self.segments[side]:
            pts += [seg.s_a, seg.s_b]
        return _unique_sorted(np.array(pts), 1e-12 * L)

    def to_json(self) -> dict:
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        segs = []
        for side_segs in self.segments:
            for sg in side_segs:
                segs.append({
                    "side": sg.side, "s": [sg.s_a, sg.s_b],
                    "terms": [{"a": cplx(a), "kappa": [cplx(k[0]), cplx(k[1])], "dn_factor": cplx(f),
                               "x_ref": [float(r[0]), float(r[1])]}
                              for a, k, f, r in zip(sg.amps, sg.kappas, sg.factors, _refs(sg))],
                })
        return {
            "segments": segs,
            "beam_boundary_points": [
                {"side": b.point.side, "s": b.point.s, "amplitude": b.amplitude,
                 "corner": b.corner, "generation": b.generation}
                for b in self.beam_boundary_points],
            "beam_count": self.beam_count,
        }


def _refs(sg: TraceSegment) -> np.ndarray:
    return np.zeros((len(sg.amps), 2)) if sg.refs is None else sg.refs


def _unique_sorted(x: np.ndarray, tol: float) -> np.ndarray:
    x = np.sort(x)
    keep = np.concatenate([[True], np.diff(x) > tol])
    return x[keep]


def evaluate_go(field: GOField, x: BoundaryPoint, limit: str = "right") -> tuple[complex, complex]:
    """Trace pair ``(u, du/dn)`` of the GO field at a single boundary point."""
    u, q = field.evaluate(x.side, np.array([x.s]), limit)
    return complex(u[0]), complex(q[0])


def _snap(s: float, known: list[float], tol: float) -> float:
    for k in known:
        if abs(s - k) <= tol:
            return k
    return float(s)


def _segment(side, s_a, s_b, waves, factor) -> TraceSegment:
    return TraceSegment(
        side, float(s_a), float(s_b),
        np.array([w.a for w in waves], complex),
        np.array([w.kappa for w in waves], complex),
        np.full(len(waves), factor, complex),
        np.array([w.ref for w in waves], float).reshape(len(waves), 2),
    )


def trace_beams(problem: ScatteringProblem, tol_b: float = 0.005, tol_go: float = 0.01,
                generation_cap: int = GENERATION_CAP) -> GOField:
    """Trace the incident wave through the polygon and collect the GO boundary trace."""
    if not tol_b > 0:
        raise ValueError("tol_b must be positive")
    poly = problem.polygon
    ns = poly.n_sides
    k1, k2, alpha = problem.k1, problem.k2, problem.alpha
    segments: list[list[TraceSegment]] = [[] for _ in range(ns)]
    bbs: list[BeamBoundaryPoint] = []
    beams: list[Beam] = []
    queue: deque[Beam] = deque()
    exterior: list[Beam] = []
    inc = MediumWave.plane(k1, problem.d_inc)
    scale = poly.diameter
    # endpoints already used on each side; beams meeting at one point share it exactly
    ends: list[list[float]] = [[0.0, float(L)] for L in poly.lengths]

    for j in range(ns):
        if problem.d_inc @ poly.normals[j] >= -1e-12:
            continue
        refl, trans = interface_solve(inc, poly.tangents[j], -poly.normals[j], k1, k2, alpha,
                                      tol_go, x0=poly.vertices[j])
        segments[j].append(_segment(j, 0.0, poly.lengths[j], [inc, refl], 1.0))
        edges = (BeamEdge(poly.vertices[j], j), BeamEdge(poly.corner(j + 1), (j + 1) % ns))
        exterior.append(Beam(refl, "exterior", j, (0.0, float(poly.lengths[j])), edges, 0))
        queue.append(Beam(trans, "interior", j, (0.0, float(poly.lengths[j])), edges, 1))

    capped = False
    while queue:
        beam = queue.popleft()
        beams.append(beam)
        w = beam.wave
        d = np.asarray(w.d)
        perp = np.array([-d[1], d[0]])
        c_edge = np.array([beam.edges[0].base @ perp, beam.edges[1].base @ perp])
        lo_i = int(np.argmin(c_edge))
        c_lo, c_hi = c_edge[lo_i], c_edge[1 - lo_i]
        edge_lo, edge_hi = beam.edges[lo_i], beam.edges[1 - lo_i]
        tie = 1e-12 * scale
        for m in range(ns):
            dn = d @ poly.normals[m]
            if dn <= 1e-12:
                continue
            P0 = poly.vertices[m]
            c0 = P0 @ perp
            c1 = c0 + poly.lengths[m] * dn
            lo, hi = max(c_lo, c0), min(c_hi, c1)
            if hi - lo <= tie:
                continue
            # corners within round-off of a beam edge count as inside the beam
            lo_is_edge = c_lo > c0 + tie
            hi_is_edge = c_hi < c1 - tie
            s_lo = _snap((lo - c0) / dn, ends[m], 1e-10 * scale) if lo_is_edge else 0.0
            s_hi = _snap((hi - c0) / dn, ends[m], 1e-10 * scale) if hi_is_edge else float(poly.lengths[m])
            ends[m] += [s_lo, s_hi]
            x_lo = poly.point(m, s_lo)
            x_hi = poly.point(m, s_hi)
            amp_lo, amp_hi = w.amplitude(x_lo), w.amplitude(x_hi)
            if max(amp_lo, amp_hi) <= tol_b:
                continue
            refl, trans = interface_solve(w, poly.tangents[m], poly.normals[m], k2, k1, 1.0 / alpha,
                                          tol_go, x0=P0)
            segments[m].append(_segment(m, s_lo, s_hi, [w, refl], alpha))
            exterior.append(Beam(trans, "exterior", m, (s_lo, s_hi),
                                 (BeamEdge(x_lo, None), BeamEdge(x_hi, None)), beam.generation))
            if lo_is_edge:
                bbs.append(BeamBoundaryPoint(BoundaryPoint(m, float(s_lo)), float(amp_lo),
                                             edge_lo.corner, beam.generation))
            if hi_is_edge:
                bbs.append(BeamBoundaryPoint(BoundaryPoint(m, float(s_hi)), float(amp_hi),
                                             edge_hi.corner, beam.generation))
            # child edges starting at a corner carry that corner's provenance
            prov_lo = None if lo_is_edge else m
            prov_hi = None if hi_is_edge else (m + 1) % ns
            if beam.generation + 1 > generation_cap:
                capped = True
                continue
            queue.append(Beam(refl, "interior", m, (s_lo, s_hi),
                              (BeamEdge(x_lo, prov_lo), BeamEdge(x_hi, prov_hi)), beam.generation + 1))
    if capped:
        log.warning("beam generation cap %d reached", generation_cap)
    log.debug("traced %d beams, %d beam-boundary points", len(beams), len(bbs))
    return GOField(problem, segments, bbs, len(beams), beams, capped, exterior)


def strong_beam_boundaries(field: GOField, tol_bb: float = 0.01) -> list[tuple[int, BoundaryPoint]]:
    """Beam-boundary points with corner provenance and incident amplitude above ``tol_bb``."""
    if not tol_bb > 0:
        raise ValueError("tol_bb must be positive")
    return [(b.corner, b.point) for b in field.beam_boundary_points
            if b.corner is not None and b.amplitude > tol_bb]


def _in_strip(beam: Beam, poly, x: np.ndarray) -> np.ndarray:
    d = np.asarray(beam.wave.d)
    perp = np.array([-d[1], d[0]])
    c = x @ perp
    ce = sorted(e.base @ perp for e in beam.edges)
    ahead = (x - poly.vertices[beam.side]) @ poly.normals[beam.side]
    ahead = ahead < 0 if beam.medium == "interior" else ahead > 0
    # half-open (shifted by a rounding margin) so that abutting strips share no points
    tol = 1e-12 * poly.diameter
    return (c >= ce[0] - tol) & (c < ce[1] - tol) & ahead


def go_field_at(field: GOField, x) -> np.ndarray:
    """GO approximation of ``u1`` (exterior points) or ``u2`` (interior points) off the boundary.

    Exterior: incident wave outside the shadow strip plus reflected and
    outgoing transmitted beams; interior: the sum of internal beams. Points on
    the boundary get NaN.
    """
    problem = field.problem
    poly = problem.polygon
    x = np.atleast_2d(np.asarray(x, dtype=float))
    reg = locate_many(poly, x)
    out = np.full(x.shape[0], np.nan + 0j)
    ext = reg == Region.EXTERIOR.value
    inn = reg == Region.INTERIOR.value
    if ext.any():
        xe = x[ext]
        d = problem.d_inc
        perp = np.array([-d[1], d[0]])
        c = xe @ perp
        # shadow: beyond a side facing away from d, within that side's transverse extent
        behind = np.zeros(xe.shape[0], bool)
        for j in range(poly.n_sides):
            if d @ poly.normals[j] > 0:
                behind |= ((xe - poly.vertices[j]) @ poly.normals[j] > 0) & _shadow_side(poly, j, perp, c)
        val = np.where(behind, 0.0, MediumWave.plane(problem.k1, d).value(xe))
        for b in field.exterior_beams:
            m = _in_strip(b, poly, xe)
            if m.any():
                val[m] += b.wave.value(xe[m])
        out[ext] = val
    if inn.any():
        xi = x[inn]
        val = np.zeros(xi.shape[0], complex)
        for b in field.beams:
            m = _in_strip(b, poly, xi)
            if m.any():
                val[m] += b.wave.value(xi[m])
        out[inn] = val
    return out


def _shadow_side(poly, j: int, perp: np.ndarray, c: np.ndarray) -> np.ndarray:
    ca = poly.vertices[j] @ perp
    cb = poly.corner(j + 1) @ perp
    lo, hi = min(ca, cb), max(ca, cb)
    return (c >= lo) & (c <= hi)
