"""Command-line front end.

Subcommands: ``simulate``, ``theory``, ``estimate``, ``sweep`` and ``validate``.
Exit codes: 0 success, 1 failed validation criterion, 2 configuration,
input/output or stability error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import validation
from .asymptotics import CovariationResult, CovariationTheory, limit_summary, write_covariation_csv
from .config import as_hawkes, load_model
from .errors import HawkesError
from .estimator import CenteredPath, contrast, covariation_empirical, validation_summary
from .model import events_path_for, read_events_csv, write_events_csv
from .price_models import S1, CrossCorrelogram, LeadLagModel, MicrostructureModel, macro_correlation, write_quantity_csv
from .simulator import SimConfig, default_jobs, simulate_batch


def parse_grid(spec: str) -> np.ndarray:
    """``"0.1,1,10"``, ``"logspace:A:B:N"`` (10**A .. 10**B) or ``"linspace:A:B:N"``."""
    spec = spec.strip()
    try:
        if spec.startswith(("logspace:", "linspace:")):
            kind, a, b, n = spec.split(":")
            fn = np.logspace if kind == "logspace" else np.linspace
            out = fn(float(a), float(b), int(n))
        else:
            out = np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}: {exc}") from exc
    if out.size == 0:
        raise argparse.ArgumentTypeError(f"empty grid {spec!r}")
    return out


def _u64(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _deltas(args):
    if np.any(args.delta <= 0):
        raise HawkesError("delta values must be positive")
    return args.delta


def cmd_simulate(args) -> int:
    model = as_hawkes(load_model(args.model))
    cfg = SimConfig(args.horizon, args.seed, max_events=args.max_events,
                    replica_count=args.replicas, jobs=args.jobs)
    streams = simulate_batch(model, cfg, args.method)
    for k, s in enumerate(streams):
        write_events_csv(s, events_path_for(Path(args.out), k, len(streams)))
    return 0


def _price_rows(model, deltas, taus):
    rows = []
    if isinstance(model, MicrostructureModel):
        rows.append(("sigma2", None, None, model.sigma2))
        th = CovariationTheory(model.hawkes)
        e = S1[:2]
        rows += [("c11", dl, tu, contrast(th(dl, tu).matrix, e, e)) for dl in deltas for tu in taus]
        return rows
    mc = macro_correlation(model)
    rows += [("var_x1", None, None, mc.cov[0, 0]), ("var_x2", None, None, mc.cov[1, 1]),
             ("cov_x1x2", None, None, mc.cov[0, 1]), ("corr", None, None, mc.corr)]
    cg = CrossCorrelogram(model)
    rows += [("c12", dl, tu, cg.c12(dl, tu)) for dl in deltas for tu in taus]
    rows += [("c11", dl, tu, cg.c11(dl, tu)) for dl in deltas for tu in taus]
    return rows


def cmd_theory(args) -> int:
    model = load_model(args.model)
    deltas, taus = _deltas(args), args.tau
    if isinstance(model, (MicrostructureModel, LeadLagModel)):
        write_quantity_csv(_price_rows(model, deltas, taus), args.out)
        hawkes = model.hawkes
    else:
        hawkes = model
        hawkes.require_stable()
        write_covariation_csv(CovariationTheory(hawkes).sweep(deltas, taus), args.out)
    if args.summary:
        ls = limit_summary(hawkes)
        doc = {"model_hash": hawkes.fingerprint(),
               "spectral_radius": hawkes.stability.spectral_radius,
               "rate": ls.rate.tolist(), "Gamma": ls.Gamma.tolist(), "macro_cov": ls.macro_cov.tolist()}
        Path(args.summary).write_text(json.dumps(doc, indent=2))
    return 0


def _empirical(streams, model, deltas, taus, T, centering):
    out = []
    for dl in deltas:
        for tu in taus:
            mats = [covariation_empirical(CenteredPath.for_model(s, model, centering), dl, T, tu)
                    for s in streams]
            mean = np.mean([m.matrix for m in mats], axis=0)
            out.append(CovariationResult(float(dl), float(tu), mean, "empirical",
                                         {"replicas": len(mats)}))
    return out


def _summaries(model, seed, T, emp, theory, tolerance):
    docs = []
    for e, t in zip(emp, theory):
        stat = float(np.abs(e.matrix - t.matrix).max() / max(np.abs(t.matrix).max(), 1e-300))
        docs.append(validation_summary(model, seed, T, e.delta, e.tau, stat, tolerance, stat <= tolerance))
    return docs


def cmd_estimate(args) -> int:
    model = as_hawkes(load_model(args.model))
    deltas, taus = _deltas(args), args.tau
    streams = [read_events_csv(p, args.horizon, model.d) for p in args.events]
    T = args.T if args.T is not None else args.horizon - max(float(taus.max()), 0.0)
    emp = _empirical(streams, model, deltas, taus, T, args.centering)
    write_covariation_csv(emp, args.out)
    if args.summary:
        theory = CovariationTheory(model).sweep(deltas, taus)
        docs = _summaries(model, args.seed, T, emp, theory, args.tolerance)
        Path(args.summary).write_text(json.dumps(docs, indent=2))
    return 0


def cmd_sweep(args) -> int:
    model = as_hawkes(load_model(args.model))
    model.require_stable()
    deltas, taus = _deltas(args), args.tau
    T = args.horizon
    span = T + max(float(taus.max()), 0.0)
    cfg = SimConfig(span, args.seed, replica_count=args.replicas, jobs=args.jobs)
    streams = simulate_batch(model, cfg)
    theory = CovariationTheory(model).sweep(deltas, taus)
    emp = _empirical(streams, model, deltas, taus, T, args.centering)
    write_covariation_csv(theory + emp, args.out)
    if args.summary:
        docs = _summaries(model, args.seed, T, emp, theory, args.tolerance)
        Path(args.summary).write_text(json.dumps(docs, indent=2))
    return 0


def cmd_validate(args) -> int:
    overrides = validation.parse_overrides(args.tol)
    only = [c.strip() for c in args.only.split(",")] if args.only else None

    def show(r):
        print(validation.format_result(r), flush=True)

    verdict = validation.run_validation(only, args.budget, args.seed, overrides, args.jobs, show)
    Path(args.out).write_text(json.dumps(verdict, indent=2))
    print("ALL PASS" if verdict["passed"] else "SOME CRITERIA FAILED")
    return 0 if verdict["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hawkes-scaling", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True, grid=False):
        if model:
            sp.add_argument("--model", required=True, help="YAML/JSON model config")
        sp.add_argument("--out", required=True, help="output file")
        if grid:
            sp.add_argument("--delta", type=parse_grid, required=True,
                            help="list 'a,b,c' or 'logspace:A:B:N'")
            sp.add_argument("--tau", type=parse_grid, default=np.zeros(1),
                            help="list or 'linspace:A:B:N' (default 0)")

    sp = sub.add_parser("simulate", help="simulate event streams to CSV")
    common(sp)
    sp.add_argument("--seed", type=_u64, required=True)
    sp.add_argument("--horizon", type=_positive, required=True)
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--jobs", type=int, default=default_jobs())
    sp.add_argument("--max-events", type=int, default=50_000_000)
    sp.add_argument("--method", choices=("auto", "exp", "generic"), default="auto")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("theory", help="limit covariation or price-model quantities to CSV")
    common(sp, grid=True)
    sp.add_argument("--summary", help="also write the limit summary as JSON")
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("estimate", help="empirical covariation from event CSV files")
    common(sp, grid=True)
    sp.add_argument("--events", nargs="+", required=True, help="event CSV file(s); averaged")
    sp.add_argument("--horizon", type=_positive, required=True, help="horizon the events were simulated on")
    sp.add_argument("--T", type=_positive, help="observation length (default horizon - max tau+)")
    sp.add_argument("--centering", choices=("auto", "linear", "expected", "none"), default="auto")
    sp.add_argument("--seed", type=_u64, help="seed recorded in the JSON summary")
    sp.add_argument("--summary", help="JSON summary against theory")
    sp.add_argument("--tolerance", type=float, default=0.05)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sweep", help="simulate, then write theory and empirical covariation")
    common(sp, grid=True)
    sp.add_argument("--seed", type=_u64, required=True)
    sp.add_argument("--horizon", type=_positive, required=True)
    sp.add_argument("--replicas", type=int, default=1)
    sp.add_argument("--jobs", type=int, default=default_jobs())
    sp.add_argument("--centering", choices=("auto", "linear", "expected", "none"), default="auto")
    sp.add_argument("--summary", help="JSON summary against theory")
    sp.add_argument("--tolerance", type=float, default=0.05)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="run the acceptance checks, write a JSON verdict")
    common(sp, model=False)
    sp.add_argument("--seed", type=_u64, required=True,
                    help=f"base seed (reference runs use {validation.DEFAULT_SEED})")
    sp.add_argument("--budget", choices=sorted(validation.BUDGETS), default="default")
    sp.add_argument("--only", help="comma-separated criterion ids, e.g. c3,c5")
    sp.add_argument("--tol", action="append", metavar="KEY=VALUE", help="tolerance override")
    sp.add_argument("--jobs", type=int, default=default_jobs())
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HawkesError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
