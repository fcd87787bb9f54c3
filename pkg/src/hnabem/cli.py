"""Command-line experiment runner.

    hnabem {solve,reference,compare,sweep,fieldmap,farfield} [--config PATH] [--set key=value ...]
           [--out DIR] [--jobs N]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .pipeline import (ReferenceTooExpensive, compare, hna_far_field, run_hna, run_reference,
                       sweep_configs)
from .postproc import ERROR_COLUMNS, TraceFunction, far_field, field_map, write_error_csv
from .solver import NumericalError, dump_system, sampling_grid

log = logging.getLogger("hnabem")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _cplx_list(z) -> list:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1).tolist()


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def cmd_solve(cfg: RunConfig, out: Path, dump: bool = False) -> dict:
    run = run_hna(cfg)
    meta = run.metadata()
    meta["config"] = cfg.to_dict()
    meta["coefficients"] = _cplx_list(run.result.coefficients)
    meta["component_order"] = ["dirichlet", "neumann"]
    _write_json(out / "solution.json", meta)
    if dump:
        dump_system(run.system, out, "hna_system")
    return meta


def cmd_reference(cfg: RunConfig, out: Path) -> dict:
    t = time.perf_counter()
    ref = run_reference(cfg)
    meta = ref.space.summary()
    meta.update({"config": cfg.to_dict(), "coefficients": _cplx_list(ref.result.coefficients),
                 "residual": ref.result.residual_norm, "timings": {"total": time.perf_counter() - t}})
    _write_json(out / "reference.json", meta)
    return meta


def cmd_compare(cfg: RunConfig, out: Path) -> dict:
    cmp = compare(cfg)
    write_error_csv(out / "errors.csv", [cmp.row])
    for name, F in cmp.far_fields.items():
        F.to_csv(out / f"farfield_{name}.csv")
    return cmp.row


def _sweep_point(d: dict) -> dict:
    cfg = RunConfig.from_dict(d)
    try:
        row = compare(cfg).row
        row["status"] = "ok"
    except (NumericalError, ReferenceTooExpensive, np.linalg.LinAlgError, ValueError) as exc:
        row = {"k1": cfg.k1, "mu_re": cfg.mu.re, "mu_im": cfg.mu.im, "alpha_mode": cfg.alpha_mode(),
               "theta_i": cfg.incident_angle_rad, "status": f"error: {exc}"}
    return row


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> list[dict]:
    points = [c.to_dict() for c in sweep_configs(cfg)]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    path = out / "sweep.csv"
    cols = ERROR_COLUMNS + ["status"]
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: (repr(r[k]) if isinstance(r.get(k), float) else r.get(k, "")) for k in cols})
    return rows


def default_bbox(cfg: RunConfig) -> list[float]:
    poly = cfg.geometry.polygon()
    c = poly.centroid
    R = 1.5 * poly.circumradius
    return [c[0] - R, c[0] + R, c[1] - R, c[1] + R]


def cmd_fieldmap(cfg: RunConfig, out: Path) -> dict:
    run = run_hna(cfg)
    bbox = cfg.fieldmap.bbox or default_bbox(cfg)
    fm = field_map(run.trace(), run.go, run.problem, cfg.fieldmap.nx, cfg.fieldmap.ny, bbox)
    fm.write(out, "field")
    meta = {"nx": fm.nx, "ny": fm.ny, "bbox": list(fm.bbox), "nodata_pixels": int(fm.nodata.sum()),
            "N": run.space.N, "config": cfg.to_dict()}
    _write_json(out / "fieldmap.json", meta)
    return meta


def cmd_farfield(cfg: RunConfig, out: Path) -> dict:
    run = run_hna(cfg)
    F = hna_far_field(run, cfg.farfield.M)
    F.to_csv(out / "farfield_hna.csv")
    go_tr = TraceFunction(run.problem, run.go)
    grid = sampling_grid(run.problem, [go_tr], per_lambda=0.5)
    G = far_field(go_tr.sample(grid), run.problem, cfg.farfield.M)
    G.to_csv(out / "farfield_pgoh.csv")
    return {"M": F.M, "norm_hna": F.norm(), "norm_pgoh": G.norm()}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hnabem", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("command", choices=["solve", "reference", "compare", "sweep", "fieldmap", "farfield"])
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field by dotted path (repeatable)")
    p.add_argument("--out", type=Path, help="output directory (default: outputs.directory)")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    p.add_argument("--dump", action="store_true", help="also write the Galerkin matrix (solve)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(path: Path | None, overrides: list[str]) -> RunConfig:
    cfg = RunConfig.load(path) if path is not None else RunConfig()
    return cfg.with_overrides(overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.set)
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be at least 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "solve":
            res = cmd_solve(cfg, out, args.dump)
            print(json.dumps({k: res[k] for k in ("N", "n_bb", "beam_count", "COND")}, default=_json_default))
        elif args.command == "reference":
            res = cmd_reference(cfg, out)
            print(json.dumps({"N": res["N"]}))
        elif args.command == "compare":
            row = cmd_compare(cfg, out)
            print(json.dumps(row, default=_json_default))
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, out, args.jobs)
            print(f"{len(rows)} rows written to {out / 'sweep.csv'}")
        elif args.command == "fieldmap":
            res = cmd_fieldmap(cfg, out)
            print(json.dumps({k: res[k] for k in ("nx", "ny", "bbox")}))
        elif args.command == "farfield":
            res = cmd_farfield(cfg, out)
            print(json.dumps(res))
    except ReferenceTooExpensive as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
