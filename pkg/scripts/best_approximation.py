"""Best approximation of the computed diffracted part v_ref - v_GO in HNA spaces of degree 0..3."""

import argparse

from hnabem.config import ComplexValue, RunConfig
from hnabem.pipeline import best_approximation_errors


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=float, default=40.0)
    ap.add_argument("--mu-im", type=float, default=0.00625)
    ap.add_argument("--ref-dof", type=float, default=10.0, help="reference DOF per interior wavelength")
    args = ap.parse_args()
    cfg = RunConfig(k1=args.k1, mu=ComplexValue(1.5, args.mu_im))
    cfg.reference.dof_per_lambda2 = args.ref_dof
    for p, e in enumerate(best_approximation_errors(cfg)):
        print(f"p={p} relative L2 error (u1) = {e:.3e}", flush=True)


if __name__ == "__main__":
    main()
