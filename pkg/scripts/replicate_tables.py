"""Re-analyze the transcribed count tables and compare with the published beta."""

import argparse
import warnings

from kcbs_optics import reference_data as ref
from kcbs_optics.analysis import analyze


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    print("heralded single photons")
    for fair in (True, False):
        for ev, published in ref.HERALDED_BETA[fair].items():
            beta = analyze(ref.HERALDED_COUNTS, ev, fair, roles=ref.PRINTED_ROLES).beta
            print(f"  {ev} fair_sampling={fair!s:5} beta={beta:+.5f} published={published:+.4f}")
    print("weak coherent light")
    for nbar, series in ref.COHERENT_COUNTS.items():
        cells = []
        for ev in ("E1", "E2", "E3"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                beta = analyze(series, ev, roles=ref.PRINTED_ROLES).beta
            cells.append(f"{ev} {beta:+.4f} ({ref.COHERENT_SUMMARY[nbar][ev][1]:+.4f})")
        print(f"  nbar={nbar:.2f}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
