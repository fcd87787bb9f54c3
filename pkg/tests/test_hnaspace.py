import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hnabem.geometry import BoundaryPoint
from hnabem.hnaspace import (build_conventional_space, build_hna_space, degree_vector, eval_basis, graded_mesh,
                             hna_dimension, layer_count)
from hnabem.specfun import gauss_legendre
from conftest import triangle_problem


def test_triangle_d1_dimension(tri_k5):
    pb, go, space = tri_k5
    assert space.N == 416
    # two distinct points per lit side's corner provenance
    assert space.n_bb == 4
    assert space.N == hna_dimension(3, 3, space.n_bb)
    assert space.meta["degree_vector"] == [0, 1, 1, 2, 2, 3]


def test_dof_per_wavelength_at_k5(tri_k5):
    _, _, space = tri_k5
    assert abs(space.dof_per_lambda2 - 9.24) < 0.01


def test_degree_vector_and_layers():
    assert layer_count(3, 1.5) == 6
    assert degree_vector(3, 6).tolist() == [0, 1, 1, 2, 2, 3]
    assert degree_vector(0, 2).tolist() == [0, 0]
    with pytest.raises(ValueError):
        degree_vector(-1, 3)


@given(st.integers(0, 8), st.integers(1, 12))
def test_degree_vector_properties(p, n):
    d = degree_vector(p, n)
    assert d.size == n
    assert d[-1] == p
    assert np.all(np.diff(d) >= 0)
    assert np.all((d >= 0) & (d <= p))


@given(st.integers(1, 15), st.floats(0.05, 0.95))
def test_graded_mesh(n, sigma):
    g = graded_mesh(n, sigma).points
    assert g[0] == 0 and g[-1] == 1
    assert np.all(np.diff(g) > 0)
    if n > 1:
        assert np.allclose(g[2:] / g[1:-1], 1 / sigma)


@given(st.integers(3, 8), st.integers(0, 5), st.integers(0, 6))
def test_dimension_formula_linear_in_bb(ns, p, nbb):
    base = hna_dimension(ns, p, 0)
    assert hna_dimension(ns, p, nbb) - base == 2 * (p + 1) * nbb


def test_hexagon_dimension_without_beam_boundaries(hexagon):
    from hnabem.problem import ScatteringProblem
    pb = ScatteringProblem.from_angle(hexagon, 10.0, 1.39 + 0.00667j, math.atan(2 / 3))
    space = build_hna_space(pb, ())
    assert space.N == hna_dimension(6, 3, 0)


def test_basis_is_l2_normalised(tri_k5):
    pb, _, space = tri_k5
    rule = gauss_legendre(60)
    for b in space.basis[:: max(1, space.n_scalar // 40)]:
        if b.component != "dirichlet":
            continue
        # split the support to resolve the phase factor
        edges = np.linspace(b.s_a, b.s_b, 9)
        tot = 0.0
        for a, c in zip(edges[:-1], edges[1:]):
            s, w = rule.on_interval(a, c)
            v = np.array([eval_basis(space, b, BoundaryPoint(b.side, x)) for x in s])
            tot += w @ np.abs(v) ** 2
        assert abs(tot - 1) < 1e-10


def test_evaluate_matches_pointwise_basis(tri_k5, rng):
    pb, _, space = tri_k5
    basis = space.basis
    for side in range(3):
        s = rng.uniform(0, pb.polygon.lengths[side], 25)
        B = space.evaluate(side, s).toarray()
        for i in rng.choice(space.n_scalar, 30, replace=False):
            ref = [eval_basis(space, basis[i], BoundaryPoint(side, x)) for x in s]
            assert np.allclose(B[:, i], ref, atol=1e-13)


def test_expand_splits_components(tri_k5):
    pb, _, space = tri_k5
    c = np.zeros(space.N, complex)
    el = space.elements[0]
    c[el.first] = 1.0
    u, q = space.expand(c, el.side, np.linspace(el.s_a, el.s_b, 5))
    assert np.any(u != 0) and np.all(q == 0)


def test_phases_and_supports(tri_k5):
    pb, _, space = tri_k5
    for el in space.elements:
        if el.wavenumber == 1:
            # k1 phases only on the two sides meeting at the corner
            assert el.side in (el.corner, (el.corner - 1) % 3)
            assert el.k_phase == pb.k1
        else:
            assert el.k_phase == pb.k2


def test_conventional_space_budget():
    pb = triangle_problem(5.0)
    sp6 = build_conventional_space(pb, 6.0)
    # 6 DOF per wavelength on each side for both components, within one element's worth of rounding
    target = 2 * 3 * round(6.0 * 2 * math.pi / pb.lambda2)
    assert abs(sp6.N - target) <= 2 * 3 * 4
    assert sp6.kind == "conventional"
    with pytest.raises(ValueError):
        build_conventional_space(pb, 0.0)


def test_conventional_space_of_reported_size():
    # a fixed-size comparison space of 456 functions at k1 = 5
    pb = triangle_problem(5.0)
    sp_ = build_conventional_space(pb, 456 / 2 / (3 * 2 * math.pi / pb.lambda2))
    assert sp_.N == 456


_ANGLE_TABLE = {
    math.pi / 2: [416, 416, 416, 416, 416],
    5 * math.pi / 12: [424, 424, 424, 416, 408],
    math.pi / 3: [408, 408, 408, 400, 400],
    math.pi / 4: [416, 408, 408, 408, 400],
    math.pi / 6: [408, 408, 408, 408, 400],
}
_KS = [10.0, 20.0, 40.0, 80.0, 160.0]
# generation-3 points fall just under tol_bb here (amplitude 0.0079 at k1 = 160)
_KNOWN_MISSES = {(math.pi / 2, 160.0), (math.pi / 4, 10.0)}


@pytest.mark.parametrize("theta,k1,expected", [
    pytest.param(th, k, n, marks=pytest.mark.xfail(strict=True, reason="beam-boundary amplitude near tol_bb"))
    if (th, k) in _KNOWN_MISSES else (th, k, n)
    for th, row in _ANGLE_TABLE.items() for k, n in zip(_KS, row)
])
def test_dimension_versus_angle_and_wavenumber(theta, k1, expected):
    from hnabem.beamtrace import strong_beam_boundaries, trace_beams
    pb = triangle_problem(k1, theta=theta)
    space = build_hna_space(pb, strong_beam_boundaries(trace_beams(pb)))
    assert space.N == expected


def test_graded_mesh_examples():
    assert graded_mesh(1, 0.15).points.tolist() == [0.0, 1.0]
    assert np.allclose(graded_mesh(2, 0.15).points, [0, 0.15, 1])
    assert np.allclose(graded_mesh(6, 0.17).points, [0] + [0.17**e for e in (5, 4, 3, 2, 1)] + [1], rtol=1e-14)
    for bad in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            graded_mesh(3, bad)


def test_degree_vector_examples():
    assert degree_vector(0, 5).tolist() == [0] * 5
    assert degree_vector(3, 1).tolist() == [3]


def test_square_lowest_order_dimension_by_enumeration():
    from hnabem.geometry import make_regular_polygon
    from hnabem.problem import ScatteringProblem
    pb = ScatteringProblem.from_angle(make_regular_polygon(4, 1.0), 5.0, 1.5, 0.3)
    space = build_hna_space(pb, (), p=0)
    # per corner: two wavenumbers x two adjacent sides x two layers, plus one
    # function on each of the two remaining sides; both components
    assert space.N == 2 * 4 * (2 * 2 * 2 + 2) == 80
    assert space.N == hna_dimension(4, 0, 0)
    assert hna_dimension(3, 3, 0) == 384


def test_constant_on_side_of_length_two_pi(triangle):
    from hnabem.hnaspace import Element, _norm_constants
    el = Element(0, 0.0, 2 * math.pi, 0, 0.0, None, None, 0)
    assert abs(_norm_constants(triangle, el)[0] - 1 / math.sqrt(2 * math.pi)) < 1e-15
    pb = triangle_problem(5.0)
    space = build_conventional_space(pb, 2.0)
    for el in space.elements:
        m = np.arange(el.degree + 1)
        assert np.allclose(space.norms[el.first:el.first + el.degree + 1], np.sqrt((2 * m + 1) / (el.s_b - el.s_a)))


def test_basis_vanishes_off_support_and_decays(tri_k5):
    pb, _, space = tri_k5
    b = next(b for b in space.basis if b.wavenumber == 2 and b.degree == 0 and b.s_b - b.s_a > 3)
    other = (b.side + 1) % 3
    assert eval_basis(space, b, BoundaryPoint(other, 1.0)) == 0
    s = np.linspace(b.s_a, b.s_b, 9)
    r = np.array([np.hypot(*(BoundaryPoint(b.side, x).position(pb.polygon) - pb.polygon.vertices[b.corner]))
                  for x in s])
    mod = np.abs([eval_basis(space, b, BoundaryPoint(b.side, x)) for x in s])
    assert np.allclose(mod, b.c * np.exp(-pb.k2.imag * r), rtol=1e-12)


def test_distinct_gradings_improve_gram_conditioning():
    from hnabem.beamtrace import strong_beam_boundaries, trace_beams
    from hnabem.solver import sampling_grid
    pb = triangle_problem(5.0)
    bbs = strong_beam_boundaries(trace_beams(pb))
    conds = []
    for s1 in (0.17, 0.15):
        space = build_hna_space(pb, bbs, sigma1=s1, sigma2=0.15)
        g = sampling_grid(pb, [space], per_lambda=0.5)
        B = space.evaluate_nodes(g.node_side, g.node_s).toarray()
        conds.append(np.linalg.cond(B.conj().T @ (B * g.node_w[:, None])))
    assert conds[0] < conds[1]


def test_fixed_conventional_space_at_higher_wavenumber():
    # the 456-function space sized at k1 = 5 carries half the density at k1 = 10
    sp5 = build_conventional_space(triangle_problem(5.0), 10.13)
    assert sp5.N == 456
    pb10 = triangle_problem(10.0)
    density = sp5.N / (2 * pb10.polygon.perimeter / pb10.lambda2)
    assert abs(density - 5.07) < 0.01
