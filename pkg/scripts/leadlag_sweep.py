"""Lead-lag cross-correlogram: C12(delta, tau) over tau for several scales,
for a model where the second asset reacts to the first with a delay."""

import argparse

import numpy as np

from hawkes_scaling import CrossCorrelogram, leadlag_asymmetry, load_model
from hawkes_scaling.price_models import write_quantity_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="configs/leadlag_shift.yaml")
    ap.add_argument("--out", default="leadlag.csv")
    args = ap.parse_args()

    ll = load_model(args.model)
    cg = CrossCorrelogram(ll)
    taus = np.round(np.linspace(-3.0, 3.0, 61), 12)
    rows = []
    for d in (0.1, 0.5, 1.0, 10.0, 1e3):
        rows += [("c12", d, t, cg.c12(d, t)) for t in taus]
        a = leadlag_asymmetry(ll, d, taus, cg)
        peak = taus[int(np.argmax([cg.c12(d, t) for t in taus]))]
        rows.append(("asymmetry", d, None, a))
        print(f"delta={d:8.4g}  asymmetry={a:.4g}  argmax_tau={peak:+.2f}")
    write_quantity_csv(rows, args.out)


if __name__ == "__main__":
    main()
