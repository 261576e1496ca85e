"""E3 beta of a single photon mixed with classical partner states, as CSV."""

import argparse
import csv
import sys

from kcbs_optics.quasiprob import mixture_beta_curves, nonclassicality_witness
from kcbs_optics.states import Coherent, Thermal

PARTNERS = {
    "vacuum": Coherent.from_nbar(0.0),
    "coherent_0.1": Coherent.from_nbar(0.1),
    "coherent_1.24": Coherent.from_nbar(1.24),
    "thermal_1": Thermal(1.0),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--eta", type=float, default=1.0)
    args = p.parse_args()
    grid = [k / (args.points - 1) for k in range(args.points)]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["partner", "lambda", "beta", "witnessed"])
    for name, partner in PARTNERS.items():
        curve = mixture_beta_curves(grid, partner, args.eta)
        for lam, beta in curve.rows():
            w.writerow([name, f"{lam:.9g}", f"{beta:.9g}", int(bool(nonclassicality_witness(beta)))])
        print(f"# {name}: threshold lambda* = {curve.threshold}", file=sys.stderr)


if __name__ == "__main__":
    main()
