"""Spread of the CLT variance check across independent batches.

Each batch is 2000 paths of the microstructure model at T = 500; the script
reports the distribution of the sample variance of S_T / sqrt(T) and how often
it falls outside 5% of the limit."""

import argparse
import math

import numpy as np

from hawkes_scaling import CovariationTheory, SimConfig, simulate_batch
from hawkes_scaling.validation import micro_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batches", type=int, default=30)
    ap.add_argument("--replicas", type=int, default=2000)
    ap.add_argument("--horizon", type=float, default=500.0)
    ap.add_argument("--seed", type=int, default=10_000)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args()

    mm = micro_model()
    T = args.horizon
    s = np.array([1.0, -1.0])
    finite_T = s @ CovariationTheory(mm.hawkes)(T, 0.0).matrix @ s
    vals = []
    for b in range(args.batches):
        cfg = SimConfig(T, args.seed + b, replica_count=args.replicas, jobs=args.jobs)
        x = np.array([st.counts(T) @ s for st in simulate_batch(mm.hawkes, cfg)]) / math.sqrt(T)
        vals.append(x.var(ddof=1))
    vals = np.array(vals)
    print(f"limit sigma2          {mm.sigma2:.4f}")
    print(f"stationary, scale T   {finite_T:.4f}")
    print(f"mean over batches     {vals.mean():.4f} (sd {vals.std(ddof=1):.4f})")
    print(f"outside +-5%          {np.mean(np.abs(vals / mm.sigma2 - 1) > 0.05):.2%}")


if __name__ == "__main__":
    main()
