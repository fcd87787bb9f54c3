"""Regular hexagon with the refractive index of ice: GO/PGOH and HNA errors against the reference."""

import argparse
import math
from pathlib import Path

from hnabem.config import ComplexValue, GeometryConfig, RunConfig
from hnabem.pipeline import compare
from hnabem.postproc import write_error_csv


def hexagon_config(k1: float) -> RunConfig:
    return RunConfig(geometry=GeometryConfig(n_sides=6, side_length=2 * math.pi), k1=k1,
                     mu=ComplexValue(1.39, 0.00667), incident_angle_rad=math.atan(2 / 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=float, nargs="+", default=[10.0])
    ap.add_argument("--out", type=Path, default=Path("out/hexagon.csv"))
    ap.add_argument("--farfield-dir", type=Path, default=None, help="also write the three far-field patterns")
    args = ap.parse_args()
    rows = []
    for k1 in args.k1:
        cmp = compare(hexagon_config(k1))
        rows.append(cmp.row)
        r = cmp.row
        print(f"k1={k1:g} N={r['N']} GO={r['err_u1_GO']:.3e} HNA={r['err_u1_HNA']:.3e} "
              f"PGOH(F)={r['err_F_PGOH']:.3e} HNA(F)={r['err_F_HNA']:.3e}", flush=True)
        if args.farfield_dir is not None:
            args.farfield_dir.mkdir(parents=True, exist_ok=True)
            for name, F in cmp.far_fields.items():
                F.to_csv(args.farfield_dir / f"hexagon_k{k1:g}_{name}.csv")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_error_csv(args.out, rows)


if __name__ == "__main__":
    main()
