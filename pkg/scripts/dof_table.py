"""HNA space dimension versus incident angle and wavenumber (triangle, default tolerances)."""

import argparse
import math

from hnabem.beamtrace import strong_beam_boundaries, trace_beams
from hnabem.config import RunConfig
from hnabem.hnaspace import build_hna_space

ANGLES = {"pi/2": math.pi / 2, "5pi/12": 5 * math.pi / 12, "pi/3": math.pi / 3, "pi/4": math.pi / 4,
          "pi/6": math.pi / 6}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k1", type=float, nargs="+", default=[10, 20, 40, 80, 160])
    args = ap.parse_args()
    print("theta    " + "".join(f"{k:>8g}" for k in args.k1))
    for name, th in ANGLES.items():
        line = []
        for k1 in args.k1:
            cfg = RunConfig(k1=k1, incident_angle_rad=th)
            pb = cfg.problem()
            go = trace_beams(pb, cfg.tolerances.tol_b, cfg.tolerances.tol_go)
            line.append(build_hna_space(pb, strong_beam_boundaries(go, cfg.tolerances.tol_bb)).N)
        print(f"{name:<9}" + "".join(f"{n:>8d}" for n in line))


if __name__ == "__main__":
    main()
