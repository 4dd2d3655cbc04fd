"""Tabulate Theta(r, t) under every integral representation and report the spread.

Usage: python3 scripts/representation_grid.py [--out theta_grid.csv]
"""
import argparse
import time

import numpy as np

from hwlaw.theta import AVERAGED, COSCOS, SINSIN, YOR, shifted, theta_values

REPS = {"yor": YOR, "coscos": COSCOS, "sinsin": SINSIN, "averaged": AVERAGED,
        "shifted(0.3)": shifted(0.3), "shifted(1.0)": shifted(1.0), "shifted(2.5)": shifted(2.5)}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="theta_grid.csv")
    args = ap.parse_args()
    r = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    rows = ["r,t," + ",".join(REPS) + ",spread"]
    start = time.perf_counter()
    for t in (0.25, 0.5, 1.0, 2.0, 4.0):
        vals = np.array([theta_values(r, t, rep)[0] for rep in REPS.values()])
        spread = vals.max(axis=0) - vals.min(axis=0)
        for j, rj in enumerate(r):
            rows.append(",".join(repr(float(x)) for x in (rj, t, *vals[:, j], spread[j])))
    with open(args.out, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {args.out} in {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
