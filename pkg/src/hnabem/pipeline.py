"""End-to-end runs: GO + HNA solve, reference solve and error comparison."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .beamtrace import GOField, strong_beam_boundaries, trace_beams
from .config import RunConfig
from .hnaspace import ApproximationSpace, build_conventional_space, build_hna_space
from .postproc import ErrorReport, FarFieldPattern, TraceFunction, far_field, rel_errors
from .problem import ScatteringProblem
from .solver import (GalerkinSystem, QuadratureConfig, ReferenceSolution, SolveResult, assemble,
                     best_approximation, sample_space, sampling_grid, solve, solve_reference)

log = logging.getLogger(__name__)


class ReferenceTooExpensive(RuntimeError):
    def __init__(self, N: int, cap: int):
        super().__init__(f"reference space would have N = {N} > cap {cap} "
                         f"(dense LU ~ {8 * N ** 3 / 3 / 1e9:.0f} GFlop, matrix {16 * N * N / 2 ** 30:.1f} GiB)")
        self.N = N
        self.cap = cap


@dataclass
class HNARun:
    problem: ScatteringProblem
    go: GOField
    space: ApproximationSpace
    system: GalerkinSystem
    result: SolveResult
    timings: dict = field(default_factory=dict)

    def trace(self) -> TraceFunction:
        return TraceFunction(self.problem, self.go, self.space, self.result.coefficients)

    def go_trace(self) -> TraceFunction:
        return TraceFunction(self.problem, self.go)

    def metadata(self) -> dict:
        return {"N": self.space.N, "n_bb": self.space.n_bb, "beam_count": self.go.beam_count,
                "COND": self.result.condition_2norm, "residual": self.result.residual_norm,
                "rank_deficient": self.result.rank_deficient,
                "DOFperL1": self.space.dof_per_lambda1, "DOFperL2": self.space.dof_per_lambda2,
                "timings": self.timings}


def quadrature_config(cfg: RunConfig) -> QuadratureConfig:
    return QuadratureConfig(n_gauss=cfg.quadrature.n_gauss, h_factor=cfg.quadrature.h_factor)


def run_hna(cfg: RunConfig, condition: bool = True) -> HNARun:
    problem = cfg.problem()
    tm = {}
    t = time.perf_counter()
    go = trace_beams(problem, cfg.tolerances.tol_b, cfg.tolerances.tol_go)
    tm["beamtrace"] = time.perf_counter() - t
    t = time.perf_counter()
    space = build_hna_space(problem, strong_beam_boundaries(go, cfg.tolerances.tol_bb), p=cfg.space.p,
                            c_np=cfg.space.c_np, sigma1=cfg.space.sigma1, sigma2=cfg.space.sigma2)
    tm["space"] = time.perf_counter() - t
    t = time.perf_counter()
    system = assemble(space, problem, go, quadrature_config(cfg))
    tm["assemble"] = time.perf_counter() - t
    t = time.perf_counter()
    result = solve(system, condition=condition, singular="lstsq")
    tm["solve"] = time.perf_counter() - t
    return HNARun(problem, go, space, system, result, tm)


def reference_size(cfg: RunConfig) -> int:
    r = cfg.reference
    return build_conventional_space(cfg.problem(), r.dof_per_lambda2, p=r.p, sigma=r.sigma,
                                    p_corner=r.p_corner).N


def run_reference(cfg: RunConfig) -> ReferenceSolution:
    r = cfg.reference
    N = reference_size(cfg)
    if N > r.max_N:
        raise ReferenceTooExpensive(N, r.max_N)
    return solve_reference(cfg.problem(), r.dof_per_lambda2, p=r.p, p_corner=r.p_corner, sigma=r.sigma,
                           qc=quadrature_config(cfg))


@dataclass
class Comparison:
    row: dict
    go: ErrorReport
    hna: ErrorReport
    far_fields: dict


def compare(cfg: RunConfig, hna: HNARun | None = None, reference: ReferenceSolution | None = None) -> Comparison:
    """GO, HNA and reference solutions and their relative errors (one table row)."""
    if reference is None:
        reference = run_reference(cfg)
    if hna is None:
        hna = run_hna(cfg)
    problem = hna.problem
    ref_tr = TraceFunction(problem, space=reference.space, coeffs=reference.result.coefficients)
    go_tr = hna.go_trace()
    hna_tr = hna.trace()
    grid = sampling_grid(problem, [ref_tr, hna_tr], per_lambda=0.5)
    R, G, H = ref_tr.sample(grid), go_tr.sample(grid), hna_tr.sample(grid)
    M = cfg.farfield.M
    FR, FG, FH = (far_field(T, problem, M) for T in (R, G, H))
    meta = hna.metadata()
    eg = rel_errors(G, R, FG, FR, meta)
    eh = rel_errors(H, R, FH, FR, meta)
    row = {
        "k1": float(cfg.k1), "mu_re": float(cfg.mu.re), "mu_im": float(cfg.mu.im),
        "alpha_mode": cfg.alpha_mode(), "theta_i": float(cfg.incident_angle_rad),
        "N": hna.space.N, "DOFperL1": hna.space.dof_per_lambda1, "DOFperL2": hna.space.dof_per_lambda2,
        "COND": hna.result.condition_2norm,
        "err_u1_GO": eg.rel_L2_u1, "err_u1_HNA": eh.rel_L2_u1,
        "err_dudn_GO": eg.rel_L2_dudn, "err_dudn_HNA": eh.rel_L2_dudn,
        "err_F_PGOH": eg.rel_L2_F, "err_F_HNA": eh.rel_L2_F,
    }
    return Comparison(row, eg, eh, {"reference": FR, "pgoh": FG, "hna": FH})


def sweep_configs(cfg: RunConfig) -> list[RunConfig]:
    out = []
    for v in cfg.sweep.values:
        c = cfg.to_dict()
        if cfg.sweep.axis == "k1":
            c["k1"] = v
        elif cfg.sweep.axis == "angle":
            c["incident_angle_rad"] = v
        elif cfg.sweep.axis == "mu_im":
            c["mu"]["im"] = v
        else:
            c["mu"] = {"re": v[0], "im": v[1]} if isinstance(v, (list, tuple)) else v
        out.append(RunConfig.from_dict(c))
    return out


def hna_far_field(run: HNARun, M: int | None = None) -> FarFieldPattern:
    grid = sampling_grid(run.problem, [run.trace()], per_lambda=0.5)
    return far_field(run.trace().sample(grid), run.problem, M)


def boundary_difference(run: HNARun) -> float:
    """Relative L2 size of the computed diffracted part ``v - v_GO`` (Dirichlet component)."""
    tr = run.trace()
    grid = sampling_grid(run.problem, [tr], per_lambda=0.5)
    H = tr.sample(grid)
    G = run.go_trace().sample(grid)
    return float((H - G).norm("u") / max(H.norm("u"), np.finfo(float).tiny))


def best_approximation_errors(cfg: RunConfig, degrees=(0, 1, 2, 3),
                              reference: ReferenceSolution | None = None) -> list[float]:
    """Relative L2 error of the best approximation of ``v_ref - v_GO`` in HNA spaces of each degree.

    Errors are normalised by the reference Dirichlet trace.
    """
    pb = cfg.problem()
    t, sc = cfg.tolerances, cfg.space
    go = trace_beams(pb, t.tol_b, t.tol_go)
    bbs = strong_beam_boundaries(go, t.tol_bb)
    if reference is None:
        reference = run_reference(cfg)
    ref_tr = TraceFunction(pb, space=reference.space, coeffs=reference.result.coefficients)
    go_tr = TraceFunction(pb, go)
    spaces = [build_hna_space(pb, bbs, p=p, c_np=sc.c_np, sigma1=sc.sigma1, sigma2=sc.sigma2) for p in degrees]
    grid = sampling_grid(pb, [ref_tr, go_tr] + spaces, per_lambda=0.5)
    R = ref_tr.sample(grid)
    target = R - go_tr.sample(grid)
    out = []
    for space in spaces:
        res = best_approximation(space, target)
        err = sample_space(space, res.coefficients, grid) - target
        out.append(float(err.norm("u") / R.norm("u")))
    return out
