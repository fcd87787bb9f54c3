"""GO and HNA errors against the reference for five incident angles on the triangle."""

import argparse
import math
from pathlib import Path

from hnabem.config import RunConfig
from hnabem.pipeline import compare
from hnabem.postproc import write_error_csv

ANGLES = [math.pi / 6, math.pi / 4, math.pi / 3, 5 * math.pi / 12, math.pi / 2]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=float, nargs="+", default=[10.0])
    ap.add_argument("--out", type=Path, default=Path("out/angle_sweep.csv"))
    args = ap.parse_args()
    rows = []
    for k1 in args.k1:
        for th in ANGLES:
            row = compare(RunConfig(k1=k1, incident_angle_rad=th)).row
            rows.append(row)
            print(f"k1={k1:g} theta={th:.4f} N={row['N']} GO={row['err_u1_GO']:.3e} HNA={row['err_u1_HNA']:.3e}",
                  flush=True)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_error_csv(args.out, rows)


if __name__ == "__main__":
    main()
