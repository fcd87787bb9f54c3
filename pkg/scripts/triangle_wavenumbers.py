"""Triangle, incident direction d1: errors against the reference and HNA conditioning versus k1.

Wavenumbers up to --max-compare-k are compared with a conventional reference;
above that only the HNA system is solved (dimension, condition number and the
size of the computed diffracted part are reported).
"""

import argparse
from pathlib import Path

from hnabem.config import RunConfig
from hnabem.pipeline import boundary_difference, compare, run_hna
from hnabem.postproc import write_error_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=float, nargs="+", default=[5, 10, 20, 40, 80, 160])
    ap.add_argument("--max-compare-k", type=float, default=20.0)
    ap.add_argument("--out", type=Path, default=Path("out/triangle_d1.csv"))
    args = ap.parse_args()
    rows = []
    for k1 in args.k1:
        cfg = RunConfig(k1=k1)
        if k1 <= args.max_compare_k:
            row = compare(cfg).row
            print(f"k1={k1:g} N={row['N']} COND={row['COND']:.3e} GO={row['err_u1_GO']:.3e} "
                  f"HNA={row['err_u1_HNA']:.3e} PGOH(F)={row['err_F_PGOH']:.3e} HNA(F)={row['err_F_HNA']:.3e}",
                  flush=True)
        else:
            run = run_hna(cfg)
            s = run.space
            row = {"k1": k1, "mu_re": cfg.mu.re, "mu_im": cfg.mu.im, "alpha_mode": cfg.alpha_mode(),
                   "theta_i": cfg.incident_angle_rad, "N": s.N, "DOFperL1": s.dof_per_lambda1,
                   "DOFperL2": s.dof_per_lambda2, "COND": run.result.condition_2norm}
            print(f"k1={k1:g} N={s.N} COND={row['COND']:.3e} |v-v_GO|/|v|={boundary_difference(run):.3e}",
                  flush=True)
        rows.append(row)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_error_csv(args.out, rows)


if __name__ == "__main__":
    main()
