"""Closed-form coherent-light predictions against the tabulated ones.

Prints, per intensity and event, the prediction at the printed mean photon
number, at the one back-solved from the printed P(E2), and the tabulated value.
"""

import argparse
import math

from kcbs_optics.events import coherent_beta_closed_form
from kcbs_optics.reference_data import COHERENT_SUMMARY


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    print(f"{'nbar':>5} {'nbar*':>8} {'event':>5} {'beta(nbar)':>11} {'beta(nbar*)':>12} {'table':>8}")
    for nbar, row in COHERENT_SUMMARY.items():
        n_true = -math.log1p(-row["E2"][2])
        for ev in ("E1", "E2", "E3"):
            b0, _ = coherent_beta_closed_form(nbar, ev)
            b1, _ = coherent_beta_closed_form(n_true, ev)
            print(f"{nbar:5.2f} {n_true:8.5f} {ev:>5} {b0:11.5f} {b1:12.5f} {row[ev][0]:8.4f}")


if __name__ == "__main__":
    main()
