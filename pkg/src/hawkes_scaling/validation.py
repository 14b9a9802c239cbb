"""Acceptance checks comparing simulation, theory and closed forms.

Each check returns a ``CriterionResult``.  ``run_validation`` runs a selection
of them under a ``Budget`` and packs the outcome into a JSON-ready verdict
(see ``schemas/verdict.schema.json``).  Replica seeds are derived from one
base seed, so a verdict is reproducible from ``(budget, seed, tolerances)``.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import CovariationTheory, limit_summary
from .estimator import CenteredPath, contrast, covariation_empirical, lln_statistic
from .kernels import ExpKernel, KernelMatrix, ZeroKernel, cross_series_F, psi_series, shifted_kernel
from .model import HawkesModel
from .price_models import S1, S2, CrossCorrelogram, LeadLagModel, MicrostructureModel, critical_value, leadlag_asymmetry
from .simulator import SimConfig, derive_seed, simulate, simulate_batch

DEFAULT_SEED = 2012

TOLERANCES = {
    "c1": 0.05,            # median LLN statistic
    "c1_runtime": 30.0,
    "c2": 0.05,            # relative error of the CLT variance
    "c2_runtime": 120.0,
    "c3": 1e-6,
    "c4": 0.05,            # relative to max |v|
    "c4_runtime": 60.0,
    "c5": 1e-6,
    "c5_integral": 1e-5,
    "c6": 1e-6,
    "c7": 0.05,            # C12 ratio between the finest and coarsest scale
    "c7_se": 2.0,          # standard errors separating the empirical values
    "c8": 1e-6,
    "c8_effect": 1e-3,
    "c8_decay": 0.1,
    "c9": 1e-4,
    "c10_transpose": 1e-12,
    "c10_even": 1e-10,
    "c10_se": 3.0,
}

NAMES = {
    "c1": "lln",
    "c2": "clt_variance",
    "c3": "critical_value",
    "c4": "covariation_single_path",
    "c5": "psi_closed_form",
    "c6": "F_closed_form",
    "c7": "epps_effect",
    "c8": "lead_lag",
    "c9": "correlogram_cross_check",
    "c10": "property_suites",
}


@dataclass(frozen=True)
class Budget:
    lln_replicas: int = 20
    lln_T: float = 1e4
    lln_T_small: float = 1e3
    clt_replicas: int = 2000
    clt_T: float = 500.0
    path_T: float = 1e5
    mc_replicas: int = 200
    mc_T: float = 100.0


BUDGETS = {
    "default": Budget(),
    "quick": Budget(lln_replicas=4, lln_T=2e3, lln_T_small=2e2, clt_replicas=200, clt_T=100.0,
                    path_T=1e4, mc_replicas=50, mc_T=50.0),
}


@dataclass
class CriterionResult:
    id: str
    name: str
    measured: float
    target: float
    tolerance: float
    passed: bool
    runtime_s: float = 0.0
    summary: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)


def _summary(model, seed, T, delta, tau, statistic, tol, passed):
    return {"model_hash": None if model is None else model.fingerprint(), "seed": seed,
            "T": T, "delta": delta, "tau": tau, "statistic": float(statistic),
            "tolerance": float(tol), "pass": bool(passed)}


# reference models

def micro_model() -> MicrostructureModel:
    return MicrostructureModel(1.0, ExpKernel(0.5, 1.0))


def epps_model() -> LeadLagModel:
    h = ExpKernel(0.5, 1.0)
    return LeadLagModel(1.0, 1.0, h, h)


def shifted_leadlag_model(eps: float = 0.5, step: float = 1e-3) -> LeadLagModel:
    h = ExpKernel(0.5, 1.0)
    return LeadLagModel(1.0, 1.0, h, shifted_kernel(h, eps, step, 40.0 + eps))


def asymmetric_leadlag_model() -> LeadLagModel:
    return LeadLagModel(1.0, 0.7, ExpKernel(0.5, 1.0), ExpKernel(0.8, 2.0))


@functools.lru_cache(maxsize=None)
def _theory(key):
    builders = {"micro": lambda: micro_model().hawkes,
                "epps": lambda: epps_model().hawkes,
                "asym": lambda: asymmetric_leadlag_model().hawkes}
    return CovariationTheory(builders[key]())


@functools.lru_cache(maxsize=None)
def _correlogram(key):
    builders = {"epps": epps_model, "asym": asymmetric_leadlag_model, "shift": shifted_leadlag_model}
    return CrossCorrelogram(builders[key]())


# criteria

def check_lln(budget, seed, tol, jobs=1):
    model = micro_model().hawkes
    meds = {}
    for k, T in enumerate((budget.lln_T_small, budget.lln_T)):
        cfg = SimConfig(T, derive_seed(seed, k), replica_count=budget.lln_replicas, jobs=jobs)
        meds[T] = float(np.median([lln_statistic(s, model) for s in simulate_batch(model, cfg)]))
    big, small = meds[budget.lln_T], meds[budget.lln_T_small]
    ok = big <= tol["c1"] and big < small
    return ok, big, 0.0, tol["c1"], {"median_small_T": small, "T_small": budget.lln_T_small}, \
        _summary(model, seed, budget.lln_T, None, None, big, tol["c1"], ok)


def check_clt(budget, seed, tol, jobs=1):
    mm = micro_model()
    model = mm.hawkes
    cfg = SimConfig(budget.clt_T, seed, replica_count=budget.clt_replicas, jobs=jobs)
    streams = simulate_batch(model, cfg)
    s = np.array([contrast(np.eye(2), s.counts(budget.clt_T), [1.0, -1.0]) for s in streams])
    var = float(np.var(s / math.sqrt(budget.clt_T), ddof=1))
    target = mm.sigma2
    rel = abs(var - target) / target
    ok = rel <= tol["c2"]
    se = target * math.sqrt(2.0 / (len(s) - 1))
    return ok, var, target, tol["c2"], {"relative_error": rel, "approx_stderr": se}, \
        _summary(model, seed, budget.clt_T, None, None, rel, tol["c2"], ok)


def check_critical(budget, seed, tol, jobs=1):
    x = critical_value()
    err = abs(x - 0.618034)
    ok = err <= tol["c3"]
    return ok, x, 0.618034, tol["c3"], {"abs_error": err}, \
        _summary(None, None, None, None, None, err, tol["c3"], ok)


def check_theorem3(budget, seed, tol, jobs=1):
    model = micro_model().hawkes
    T = budget.path_T
    stream = simulate(model, SimConfig(T, seed))
    V = covariation_empirical(CenteredPath.linear(stream, model), 1.0, T, 0.0)
    v = _theory("micro")(1.0, 0.0).matrix
    rel = float(np.abs(V.matrix - v).max() / np.abs(v).max())
    ok = rel <= tol["c4"]
    return ok, rel, 0.0, tol["c4"], {"empirical": V.matrix.tolist(), "theory": v.tolist(),
                                     "stderr": V.meta["stderr"].tolist()}, \
        _summary(model, seed, T, 1.0, 0.0, rel, tol["c4"], ok)


def check_psi(budget, seed, tol, jobs=1):
    km = KernelMatrix(((ExpKernel(0.5, 1.0),),))
    psi = psi_series(km, step=1e-3, horizon=40.0)
    t = psi.times
    sup = float(np.abs(psi.values[:, 0, 0] - 0.5 * np.exp(-0.5 * t)).max())
    ierr = abs(float(psi.integral()[0, 0]) - (1.0 / (1 - 0.5) - 1.0))
    ok = sup <= tol["c5"] and ierr <= tol["c5_integral"]
    return ok, sup, 0.0, tol["c5"], {"integral_error": ierr, "integral_tolerance": tol["c5_integral"],
                                     "n_terms": psi.meta["n_terms"]}, \
        _summary(None, None, None, None, None, sup, tol["c5"], ok)


def check_F(budget, seed, tol, jobs=1):
    h = ExpKernel(0.5, 1.0)
    F = cross_series_F(h, h, step=1e-3, horizon=40.0)
    t = F.times
    sup = float(np.abs(F.scalar() - 0.25 * (np.exp(-0.5 * t) - np.exp(-1.5 * t))).max())
    ok = sup <= tol["c6"]
    return ok, sup, 0.0, tol["c6"], {}, _summary(None, None, None, None, None, sup, tol["c6"], ok)


def check_epps(budget, seed, tol, jobs=1):
    cg = _correlogram("epps")
    fine, coarse = cg.c12(1e-2, 0.0), cg.c12(1e3, 0.0)
    ratio = fine / coarse
    model = epps_model().hawkes
    T = budget.path_T
    stream = simulate(model, SimConfig(T, seed))
    path = CenteredPath.linear(stream, model)
    emp = {}
    for dl in (1e-2, 1e3):
        r = covariation_empirical(path, dl, T, 0.0)
        se = math.sqrt(max(contrast(r.meta["stderr"] ** 2, S1**2, S2**2), 0.0))
        emp[dl] = (contrast(r.matrix, S1, S2), se)
    k = tol["c7_se"]
    ordered = emp[1e-2][0] + k * emp[1e-2][1] < emp[1e3][0] - k * emp[1e3][1]
    ok = ratio < tol["c7"] and ordered
    det = {"theory_fine": fine, "theory_coarse": coarse,
           "empirical_fine": emp[1e-2][0], "empirical_fine_se": emp[1e-2][1],
           "empirical_coarse": emp[1e3][0], "empirical_coarse_se": emp[1e3][1],
           "empirical_ordering": bool(ordered)}
    return ok, ratio, 0.0, tol["c7"], det, _summary(model, seed, T, 1e-2, 0.0, ratio, tol["c7"], ok)


def check_leadlag(budget, seed, tol, jobs=1):
    eps = 0.5
    cg = _correlogram("shift")
    taus = np.round(np.linspace(-3.0, 3.0, 61), 12)
    ident = 0.0
    for dl in (0.1, 1.0, 10.0, 1e3):
        for tu in taus:
            ident = max(ident, abs(cg.c12(dl, -tu) - cg.c12(dl, tu + eps)))
    model = cg.model
    a1 = leadlag_asymmetry(model, 1.0, taus, cg)
    a3 = leadlag_asymmetry(model, 1e3, taus, cg)
    ok = ident <= tol["c8"] and a1 > tol["c8_effect"] and a3 < tol["c8_decay"] * a1
    return ok, ident, 0.0, tol["c8"], {"asymmetry_delta_1": a1, "asymmetry_delta_1000": a3,
                                       "F_source": cg.F_source}, \
        _summary(model.hawkes, None, None, 1.0, None, ident, tol["c8"], ok)


def check_cross(budget, seed, tol, jobs=1):
    cg = _correlogram("asym")
    th = _theory("asym")
    e12 = S1
    worst = 0.0
    for dl in (0.05, 0.5, 1.0, 5.0, 50.0):
        for tu in (-2.0, -0.5, 0.0, 0.5, 2.0):
            v = th(dl, tu).matrix
            for got, ref in ((cg.c11(dl, tu), contrast(v, e12, e12)),
                             (cg.c12(dl, tu), contrast(v, e12, S2))):
                worst = max(worst, abs(got - ref) / abs(ref))
    ok = worst <= tol["c9"]
    return ok, worst, 0.0, tol["c9"], {}, \
        _summary(cg.model.hawkes, None, None, None, None, worst, tol["c9"], ok)


def check_properties(budget, seed, tol, jobs=1):
    sub = {}
    grid_d = (0.01, 0.3, 1.0, 7.0, 100.0)
    grid_t = (0.0, 0.25, 1.0, 3.0, 20.0)
    th = _theory("asym")
    sym = max(float(np.abs(th(dl, tu).matrix - th(dl, -tu).matrix.T).max())
              for dl in grid_d for tu in grid_t)
    sub["transpose_symmetry"] = (sym, sym <= tol["c10_transpose"])
    cg = _correlogram("asym")
    ev = max(abs(cg.c11(dl, tu) - cg.c11(dl, -tu)) for dl in grid_d for tu in grid_t)
    sub["c11_evenness"] = (ev, ev <= tol["c10_even"])

    k = tol["c10_se"]
    R, T = budget.mc_replicas, budget.mc_T
    model = micro_model().hawkes
    streams = simulate_batch(model, SimConfig(T, derive_seed(seed, 0), replica_count=R, jobs=jobs))
    n = np.array([s.counts(T) for s in streams])
    bound = T * limit_summary(model).rate
    se = n.std(axis=0, ddof=1) / math.sqrt(R)
    z = float(((n.mean(axis=0) - bound) / se).max())
    sub["expected_count_bound"] = (z, z <= k)

    pois = HawkesModel([1.0, 2.0], KernelMatrix.zeros(2))
    streams = simulate_batch(pois, SimConfig(T, derive_seed(seed, 1), replica_count=R, jobs=jobs))
    n = np.array([s.counts(T) for s in streams])
    lam = T * pois.mu
    zm = float(np.abs((n.mean(axis=0) - lam) / np.sqrt(lam / R)).max())
    var = n.var(axis=0, ddof=1)
    zv = float(np.abs((var - lam) / (lam * math.sqrt(2.0 / (R - 1)))).max())
    sub["poisson_mean"] = (zm, zm <= k)
    sub["poisson_variance"] = (zv, zv <= k)

    cfg = SimConfig(T, derive_seed(seed, 2), replica_count=8, jobs=1)
    a = simulate_batch(model, cfg)
    b = simulate_batch(model, cfg)
    c = simulate_batch(model, SimConfig(T, cfg.seed, replica_count=8, jobs=4))
    same = all(np.array_equal(x.times, y.times) and np.array_equal(x.components, y.components)
               for x, y in zip(a + a, b + c))
    sub["batch_determinism"] = (0.0 if same else 1.0, same)

    failed = sum(not ok for _, ok in sub.values())
    ok = failed == 0
    det = {name: {"value": v, "pass": bool(p)} for name, (v, p) in sub.items()}
    return ok, float(failed), 0.0, 0.0, det, _summary(model, seed, T, None, None, failed, 0.0, ok)


CHECKS = {
    "c1": check_lln,
    "c2": check_clt,
    "c3": check_critical,
    "c4": check_theorem3,
    "c5": check_psi,
    "c6": check_F,
    "c7": check_epps,
    "c8": check_leadlag,
    "c9": check_cross,
    "c10": check_properties,
}


def run_criterion(cid: str, budget: Budget = BUDGETS["default"], seed: int = DEFAULT_SEED,
                  overrides: dict | None = None, jobs: int = 1) -> CriterionResult:
    tol = dict(TOLERANCES)
    tol.update(overrides or {})
    idx = int(cid[1:])
    t0 = time.perf_counter()
    ok, measured, target, tolerance, details, summary = CHECKS[cid](budget, derive_seed(seed, 100 + idx), tol, jobs)
    runtime = time.perf_counter() - t0
    limit = tol.get(f"{cid}_runtime")
    if limit is not None:
        details["runtime_limit_s"] = limit
        if runtime >= limit:
            ok = False
    summary["pass"] = bool(ok)
    return CriterionResult(cid, NAMES[cid], float(measured), float(target), float(tolerance),
                           bool(ok), runtime, summary, details)


def parse_overrides(items) -> dict:
    """``["c3=0", "c7_se=3"]`` -> ``{"c3": 0.0, "c7_se": 3.0}``."""
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or key not in TOLERANCES:
            raise ValueError(f"bad tolerance override {item!r}; known keys: {', '.join(TOLERANCES)}")
        out[key] = float(val)
    return out


def run_validation(only=None, budget: str = "default", seed: int = DEFAULT_SEED,
                   overrides: dict | None = None, jobs: int = 1, progress=None) -> dict:
    ids = list(CHECKS) if not only else list(only)
    unknown = [c for c in ids if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}")
    if budget not in BUDGETS:
        raise ValueError(f"unknown budget {budget!r}")
    results = []
    for cid in ids:
        r = run_criterion(cid, BUDGETS[budget], seed, overrides, jobs)
        results.append(r)
        if progress is not None:
            progress(r)
    return {"seed": seed, "budget": budget, "budget_params": asdict(BUDGETS[budget]),
            "overrides": dict(overrides or {}), "passed": all(r.passed for r in results),
            "criteria": [_jsonable(asdict(r)) for r in results]}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def format_result(r: CriterionResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    return (f"[{status}] {r.id:<4} {r.name:<26} measured={r.measured:.6g} target={r.target:.6g} "
            f"tol={r.tolerance:.3g} ({r.runtime_s:.2f}s)")
