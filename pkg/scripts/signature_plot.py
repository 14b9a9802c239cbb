"""Signature plot of the microstructure model: variance of price increments per
unit time against the sampling scale, theory and one simulated path.

Writes ``quantity,delta,tau,value`` rows (quantities ``theory`` and ``empirical``).
"""

import argparse

import numpy as np

from hawkes_scaling import CenteredPath, CovariationTheory, ExpKernel, MicrostructureModel, SimConfig, covariation_empirical, simulate
from hawkes_scaling.price_models import write_quantity_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="signature.csv")
    ap.add_argument("--seed", type=int, default=2012)
    ap.add_argument("--horizon", type=float, default=1e5)
    ap.add_argument("--x", type=float, default=0.5, help="|phi|_1 of phi = x exp(-t)")
    args = ap.parse_args()

    mm = MicrostructureModel(1.0, ExpKernel(args.x, 1.0))
    model = mm.hawkes
    th = CovariationTheory(model)
    stream = simulate(model, SimConfig(args.horizon, args.seed))
    path = CenteredPath.linear(stream, model)
    s = np.array([1.0, -1.0])
    rows = [("sigma2", None, None, mm.sigma2)]
    for d in np.logspace(-2, 3, 21):
        rows.append(("theory", d, 0.0, s @ th(d, 0.0).matrix @ s))
        rows.append(("empirical", d, 0.0, s @ covariation_empirical(path, d, args.horizon).matrix @ s))
    write_quantity_csv(rows, args.out)
    for q, d, _, v in rows:
        print(f"{q:>9} {'' if d is None else f'{d:10.4g}'} {v:.5f}")


if __name__ == "__main__":
    main()
