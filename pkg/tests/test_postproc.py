import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hnabem.config import ComplexValue, RunConfig
from hnabem.geometry import BoundaryPoint
from hnabem.pipeline import hna_far_field, run_hna
from hnabem.postproc import (ERROR_COLUMNS, FARFIELD_COLUMNS, FarFieldPattern, TraceFunction, eval_field, far_field,
                             field_map, rel_errors, scattered_far_asymptotic, total_trace, write_error_csv)
from hnabem.solver import BoundaryTrace, sampling_grid


@pytest.fixture(scope="module")
def solved():
    return run_hna(RunConfig(k1=5.0))


@pytest.fixture(scope="module")
def invisible():
    return run_hna(RunConfig(k1=10.0, mu=ComplexValue(1.0, 0.0)))


def _grid(run, per_lambda=0.5):
    return sampling_grid(run.problem, [run.trace()], per_lambda=per_lambda)


@given(seed=st.integers(0, 2**32 - 1), scale=st.floats(0.1, 10.0))
def test_rel_errors_homogeneity(seed, scale, tri_k5):
    pb, go, _ = tri_k5
    grid = sampling_grid(pb, [go], per_lambda=2.0, n=6)
    rng = np.random.default_rng(seed)
    z = lambda: rng.normal(size=grid.n_nodes) + 1j * rng.normal(size=grid.n_nodes)
    ref = BoundaryTrace(grid, scale * z(), z())
    same = rel_errors(ref, ref)
    assert same.rel_L2_u1 == 0 and same.rel_L2_dudn == 0
    double = rel_errors(BoundaryTrace(grid, 2 * ref.u, 2 * ref.q), ref)
    assert abs(double.rel_L2_u1 - 1) < 1e-13 and abs(double.rel_L2_dudn - 1) < 1e-13


def test_rel_errors_zero_reference_is_flagged(tri_k5):
    pb, go, _ = tri_k5
    grid = sampling_grid(pb, [go], per_lambda=2.0, n=6)
    zero = BoundaryTrace(grid, np.zeros(grid.n_nodes, complex), np.zeros(grid.n_nodes, complex))
    one = BoundaryTrace(grid, np.ones(grid.n_nodes, complex), np.zeros(grid.n_nodes, complex))
    rep = rel_errors(one, zero)
    assert rep.absolute == {"u1": True, "dudn": True}
    assert abs(rep.rel_L2_u1 - math.sqrt(pb.polygon.perimeter)) < 1e-10
    assert rep.rel_L2_dudn == 0


def test_far_field_linear_and_zero(solved, rng):
    pb = solved.problem
    grid = _grid(solved)
    a = solved.trace().sample(grid)
    b = BoundaryTrace(grid, rng.normal(size=grid.n_nodes) + 0j, rng.normal(size=grid.n_nodes) + 1j)
    Fa, Fb, Fab = far_field(a, pb, 256), far_field(b, pb, 256), far_field(a + b, pb, 256)
    assert np.max(np.abs(Fab.values - Fa.values - Fb.values)) <= 1e-12 * np.max(np.abs(Fab.values))
    zero = BoundaryTrace(grid, np.zeros(grid.n_nodes, complex), np.zeros(grid.n_nodes, complex))
    assert np.all(far_field(zero, pb, 64).values == 0)
    assert far_field(a, pb).M >= 1024
    with pytest.raises(ValueError):
        far_field(a, pb, 0)


def test_total_trace_with_zero_coefficients(solved):
    zero = np.zeros(solved.space.N)
    for side, s in ((0, 0.7), (1, 3.3), (2, 5.9)):
        x = BoundaryPoint(side, s)
        u, q = total_trace(solved.go, zero, solved.space, x)
        a, b = solved.go.evaluate(side, np.array([s]))
        assert u == a[0] and q == b[0]


def test_invisible_scatterer_end_to_end(invisible):
    run = invisible
    pb = run.problem
    probe = np.array([[0.3, -0.2], [1.0, 0.5]])
    for b in run.go.beams:
        if b.generation == 1:
            assert np.allclose(b.wave.value(probe), pb.incident(probe)[0], atol=1e-12)
    assert np.max(np.abs(run.system.rhs)) <= 1e-8
    assert np.linalg.norm(run.result.coefficients) <= 1e-6
    assert hna_far_field(run).norm() <= 1e-6
    for side, s in ((0, 1.0), (1, 4.0), (2, 2.5)):
        x = BoundaryPoint(side, s)
        u, q = total_trace(run.go, run.result, run.space, x)
        ui, g = pb.incident(x.position(pb.polygon)[None])
        assert abs(u - ui[0]) < 1e-6 and abs(q - g[0] @ pb.polygon.normals[side]) < 1e-6 * pb.k1


def test_invisible_scatterer_field_map(invisible):
    run = invisible
    pb = run.problem
    fm = field_map(run.trace(), run.go, pb, 9, 7, (-7.0, 7.0, -6.0, 6.0))
    pts = fm.points()
    ok = ~fm.nodata
    assert ok.sum() > 50
    assert np.allclose(fm.total[ok], pb.incident(pts[ok])[0], atol=1e-4)
    assert np.allclose(fm.go[ok], pb.incident(pts[ok])[0], atol=1e-10)


def test_far_field_matches_large_radius_scattered_field(solved):
    pb = solved.problem
    grid = _grid(solved)
    R = pb.polygon.circumradius
    for theta in (0.3, 2.0, 4.4):
        xh = np.array([math.cos(theta), math.sin(theta)])
        Fv = _far_value(solved, grid, xh)
        errs = []
        for r in (1e4 * pb.lambda1, 1e5 * pb.lambda1):
            us = eval_field(r * xh, solved.trace(), pb, tol=1e-10, scattered=True).values[0]
            errs.append(abs(us - scattered_far_asymptotic(Fv, pb.k1, r)) / abs(us))
        # the leading neglected term is the Fresnel phase k1 |y|^2 / (2 r)
        assert errs[0] <= pb.k1 * R * R / (2e4 * pb.lambda1)
        assert abs(errs[0] / errs[1] - 10) < 0.05


def _far_value(run, grid, xh):
    tr = run.trace().sample(grid)
    k1 = run.problem.k1
    E = np.exp(-1j * k1 * (grid.node_x @ xh))
    return complex(-np.sum(grid.node_w * E * (1j * k1 * (grid.node_n @ xh) * tr.u + tr.q)))


def test_far_field_sampling_direction_convention(solved):
    grid = _grid(solved)
    F = far_field(solved.trace().sample(grid), solved.problem, 16)
    for t, v in zip(F.angles, F.values):
        assert abs(v - _far_value(solved, grid, np.array([math.cos(t), math.sin(t)]))) <= 1e-10 * abs(v)


def test_field_just_outside_matches_boundary_trace(solved):
    # second-order Taylor expansion off a flat side, with u_nn = -k1^2 u - u_ss
    pb = solved.problem
    poly = pb.polygon
    tr = solved.trace()
    h = 0.05 * pb.lambda1
    ds = 1e-3
    for side, s in ((0, 2.0), (1, 3.5), (2, 4.0)):
        (um, u, up), (_, q, _) = tr(side, np.array([s - ds, s, s + ds]))
        u_ss = (up - 2 * u + um) / ds**2
        taylor = u + h * q + 0.5 * h * h * (-pb.k1**2 * u - u_ss)
        p = poly.point(side, s) + h * poly.normals[side]
        val = eval_field(p, tr, pb, tol=1e-10).values[0]
        assert abs(val - taylor) <= 0.02 * abs(u)


def test_error_norms_are_grid_converged(solved):
    tr, go = solved.trace(), solved.go_trace()
    errs = []
    for per in (0.5, 0.25):
        grid = _grid(solved, per)
        errs.append(rel_errors(go.sample(grid), tr.sample(grid)).rel_L2_u1)
    assert abs(errs[0] - errs[1]) < 0.02 * errs[1]


def test_far_field_csv_round_trip(solved, tmp_path):
    F = hna_far_field(solved, 128)
    p = tmp_path / "ff.csv"
    F.to_csv(p)
    with open(p) as fh:
        assert next(csv.reader(fh)) == FARFIELD_COLUMNS
    G = FarFieldPattern.from_csv(p)
    assert np.array_equal(G.angles, F.angles) and np.array_equal(G.values, F.values)


def test_error_csv_schema(tmp_path):
    p = tmp_path / "err.csv"
    write_error_csv(p, [{"k1": 5.0, "N": 416, "err_u1_HNA": 0.013, "extra": 1}])
    rows = list(csv.reader(open(p)))
    assert rows[0] == ERROR_COLUMNS
    assert rows[1][0] == "5.0" and rows[1][5] == "416"


def test_field_map_files(solved, tmp_path):
    fm = field_map(solved.trace(), solved.go, solved.problem, 5, 4, (-6.0, 6.0, -5.0, 5.0))
    paths = fm.write(tmp_path)
    assert len(paths) == 9
    hdr = json.loads((tmp_path / "field_diffracted_abs.json").read_text())
    assert hdr["nx"] == 5 and hdr["ny"] == 4 and hdr["quantity"] == "diffracted_abs"
    arr = np.fromfile(paths[0], dtype="<f8").reshape(4, 5)
    assert np.array_equal(arr.ravel(), np.real(fm.total), equal_nan=True)
    with pytest.raises(ValueError):
        field_map(solved.trace(), solved.go, solved.problem, 0, 4, (-1, 1, -1, 1))


def test_trace_function_validation(solved):
    with pytest.raises(ValueError):
        TraceFunction(solved.problem, space=solved.space)
