"""Exact simulation of multivariate Hawkes processes by thinning.

Both code paths run the same algorithm on the same uniform draws:

1. ``lam_bar`` = an upper bound on the total intensity valid until the next
   accepted event, evaluated at the current time ``t``;
2. ``t += -log(1 - U1) / lam_bar``; stop once ``t > horizon``;
3. draw ``U2``; accept when ``U2 * lam_bar < sum_i lambda_i(t)`` and pick the
   component ``i`` whose cumulative-intensity slot contains ``U2 * lam_bar``.

For exponential kernels the bound is the intensity itself (kernels only decay
between events), tracked by the Markov recursion.  The generic path bounds
each past event's contribution by the kernel's tail supremum.

Seeds: ``simulate`` uses ``numpy.random.default_rng(seed)`` (PCG64 seeded
through ``SeedSequence``).  Replica ``k`` of a batch uses
``derive_seed(seed, k)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numba
import numpy as np

from .errors import ExplosionError, HawkesError
from .model import EventStream, HawkesModel

_BOUND_SLACK = 1e-9

# status codes of the jitted kernel
_DONE, _FULL, _CAP, _BOUND = 0, 1, 2, 3


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    seed: int = 0
    max_events: int = 50_000_000
    replica_count: int = 1
    jobs: int = 1

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.max_events > 0:
            raise ValueError("max_events must be positive")
        if self.replica_count < 1:
            raise ValueError("replica_count must be >= 1")


def derive_seed(seed: int, k: int) -> int:
    """64-bit seed of replica ``k``: a fixed hash of ``(seed, k)``."""
    ss = np.random.SeedSequence(entropy=[int(seed) % 2**64, int(k)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def intensity(model: HawkesModel, stream: EventStream, t: float) -> np.ndarray:
    """``lambda(t)`` from the events strictly before ``t``."""
    lam = model.mu.copy()
    past = stream.times < t
    for j in range(model.d):
        s = stream.times[past & (stream.components == j)]
        if s.size == 0:
            continue
        for i in range(model.d):
            k = model.kernels[i, j]
            if not k.is_zero:
                lam[i] += float(np.sum(k(t - s)))
    return lam


@numba.njit(nogil=True, cache=True)
def _thin_exp(mu, alpha, beta, horizon, rng, state, t0, n_done, max_events, times, comps):
    d = mu.shape[0]
    mu_sum = mu.sum()
    t = t0
    n = 0
    lam = np.empty(d)
    while True:
        if n == times.shape[0]:
            return _FULL, n, t
        lam_bar = mu_sum
        for i in range(d):
            for j in range(d):
                lam_bar += state[i, j]
        if lam_bar <= 0.0:
            return _DONE, n, t
        w = -np.log(1.0 - rng.random()) / lam_bar
        t += w
        if t > horizon:
            return _DONE, n, t
        total = 0.0
        for i in range(d):
            acc = mu[i]
            for j in range(d):
                state[i, j] *= np.exp(-beta[i, j] * w)
                acc += state[i, j]
            lam[i] = acc
            total += acc
        if total > lam_bar * (1.0 + _BOUND_SLACK):
            return _BOUND, n, t
        u = rng.random() * lam_bar
        if u < total:
            k = d - 1
            acc = 0.0
            for i in range(d):
                acc += lam[i]
                if u < acc:
                    k = i
                    break
            if n_done + n >= max_events:
                return _CAP, n, t
            times[n] = t
            comps[n] = k
            n += 1
            for i in range(d):
                state[i, k] += alpha[i, k]


def _simulate_exp(model, cfg, rng, alpha, beta):
    state = np.zeros((model.d, model.d))
    expected = _expected_total(model, cfg.horizon)
    chunk = int(min(max(1024, 1.3 * expected + 1024), cfg.max_events + 1))
    t = 0.0
    done = 0
    parts_t, parts_c = [], []
    while True:
        times = np.empty(chunk)
        comps = np.empty(chunk, dtype=np.int64)
        status, n, t = _thin_exp(model.mu, alpha, beta, float(cfg.horizon), rng, state,
                                 t, done, cfg.max_events, times, comps)
        parts_t.append(times[:n])
        parts_c.append(comps[:n])
        done += n
        if status == _DONE:
            break
        if status == _CAP:
            raise ExplosionError(f"more than {cfg.max_events} events before t={t:.6g}",
                                 model.stability.spectral_radius)
        if status == _BOUND:
            raise HawkesError("thinning bound violated (internal invariant)")
    return np.concatenate(parts_t), np.concatenate(parts_c)


def _expected_total(model, horizon):
    if model.stability.a1_holds:
        rate = np.linalg.solve(np.eye(model.d) - model.K, model.mu)
        return float(rate.sum() * horizon)
    return float(model.mu.sum() * horizon)


def _simulate_generic(model, cfg, rng):
    d = model.d
    km = model.kernels
    mu_sum = float(model.mu.sum())
    # events older than every kernel's support can be dropped
    support = max(k.support for r in km.entries for k in r)
    active = [[(i, km[i, j]) for i in range(d) if not km[i, j].is_zero] for j in range(d)]
    hist_t = [[] for _ in range(d)]
    out_t, out_c = [], []
    start = [0] * d
    t = 0.0
    while True:
        arrs = []
        for j in range(d):
            h = np.asarray(hist_t[j][start[j]:])
            if np.isfinite(support) and h.size:
                drop = int(np.searchsorted(h, t - support, side="left"))
                start[j] += drop
                h = h[drop:]
            arrs.append(h)
        lam_bar = mu_sum
        for j in range(d):
            if arrs[j].size:
                for _, k in active[j]:
                    lam_bar += float(np.sum(k.tail_sup(t - arrs[j])))
        if lam_bar <= 0.0:
            break
        w = -np.log(1.0 - rng.random()) / lam_bar
        t += w
        if t > cfg.horizon:
            break
        lam = model.mu.copy()
        for j in range(d):
            if arrs[j].size:
                for i, k in active[j]:
                    lam[i] += float(np.sum(k(t - arrs[j])))
        total = float(lam.sum())
        if total > lam_bar * (1.0 + _BOUND_SLACK):
            raise HawkesError("thinning bound violated (internal invariant)")
        u = rng.random() * lam_bar
        if u < total:
            k = d - 1
            acc = 0.0
            for i in range(d):
                acc += lam[i]
                if u < acc:
                    k = i
                    break
            if len(out_t) >= cfg.max_events:
                raise ExplosionError(f"more than {cfg.max_events} events before t={t:.6g}",
                                     model.stability.spectral_radius)
            out_t.append(t)
            out_c.append(k)
            hist_t[k].append(t)
    return np.array(out_t, dtype=float), np.array(out_c, dtype=np.int64)


def simulate(model: HawkesModel, cfg: SimConfig, method: str = "auto") -> EventStream:
    """Sample one path on ``(0, cfg.horizon]``.

    ``method`` is ``"auto"`` (exponential fast path when every kernel is zero
    or exponential), ``"exp"`` or ``"generic"``.
    """
    rng = np.random.default_rng(cfg.seed)
    params = model.kernels.exp_params()
    if method == "auto":
        method = "exp" if params is not None else "generic"
    if method == "exp":
        if params is None:
            raise ValueError("exponential fast path needs zero/exponential kernels only")
        times, comps = _simulate_exp(model, cfg, rng, *params)
    elif method == "generic":
        times, comps = _simulate_generic(model, cfg, rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EventStream(cfg.horizon, times, comps, model.d)


def default_jobs() -> int:
    return int(os.environ.get("HAWKES_JOBS", "1"))


def simulate_batch(model: HawkesModel, cfg: SimConfig, method: str = "auto") -> list[EventStream]:
    """``cfg.replica_count`` independent paths, replica ``k`` seeded by ``derive_seed(seed, k)``.

    Results do not depend on ``cfg.jobs``.
    """
    cfgs = [replace(cfg, seed=derive_seed(cfg.seed, k), replica_count=1)
            for k in range(cfg.replica_count)]
    if cfg.jobs <= 1 or len(cfgs) == 1:
        return [simulate(model, c, method) for c in cfgs]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda c: simulate(model, c, method), cfgs))
