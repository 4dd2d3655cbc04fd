"""Densities of A_t^(mu) by each available method, with their normalizations.

Usage: python3 scripts/density_curves.py [--t 1] [--out amu_curves.csv]
"""
import argparse

import numpy as np

from hwlaw.expfun import ExpFunctionalLaw, GCache, density_a_mu, normalization

MUS = (-2.0, -1.5, -0.5, 0.0, 0.5, 1.0, 2.0)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--out", default="amu_curves.csv")
    args = ap.parse_args()
    v = np.geomspace(0.05, 20.0, 40)
    cache = GCache(args.t)
    rows = ["mu,v,single,double"]
    for mu in MUS:
        single = "hermite" if mu > -1 else "negibp"
        a = density_a_mu(v, ExpFunctionalLaw(mu, args.t, single)).value
        b = density_a_mu(v, ExpFunctionalLaw(mu, args.t, "double"), cache=cache).value
        rows += [f"{mu!r},{x!r},{p!r},{q!r}" for x, p, q in zip(v.tolist(), a.tolist(), b.tolist())]
        mass = float(normalization(ExpFunctionalLaw(mu, args.t, single)).value)
        print(f"mu={mu:5.2f}  max rel diff {np.max(np.abs(a / b - 1)):.2e}  mass {mass:.10f}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
