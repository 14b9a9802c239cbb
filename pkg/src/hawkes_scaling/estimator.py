"""Empirical counterparts of the limit objects: centred count paths, binned
increments, the shifted covariation ``V(X, X_{tau+.})`` and LLN/CLT statistics.

Paths are right-continuous: an event at ``t`` is counted in ``N_t``.  Centred
paths vanish on ``t <= 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import CovariationResult, ExpectedCounts, limit_summary
from .errors import DataCoverageError
from .model import EventStream, HawkesModel

_CHUNK = 200_000


@dataclass(frozen=True, eq=False)
class CenteredPath:
    """``X_t = N_t - drift(t)`` for ``t > 0`` and ``X_t = 0`` otherwise.

    ``drift`` maps an array of times to an array of shape ``t.shape + (d,)``.
    """

    stream: EventStream
    drift: Callable
    mode: str = "custom"

    @classmethod
    def linear(cls, stream: EventStream, model: HawkesModel) -> "CenteredPath":
        """Centre by ``t (Id - K)^{-1} mu``."""
        rate = limit_summary(model).rate
        return cls(stream, lambda t: np.asarray(t, dtype=float)[..., None] * rate, "linear")

    @classmethod
    def expected(cls, stream: EventStream, model: HawkesModel, psi=None) -> "CenteredPath":
        """Centre by ``E(N_t)``; past the psi horizon ``E(N_t)`` is extended linearly."""
        ec = ExpectedCounts(model, psi)
        return cls(stream, lambda t: ec(np.maximum(t, 0.0), extrapolate=True), "expected")

    @classmethod
    def uncentered(cls, stream: EventStream) -> "CenteredPath":
        zero = np.zeros(stream.d)
        return cls(stream, lambda t: np.asarray(t, dtype=float)[..., None] * zero, "none")

    @classmethod
    def for_model(cls, stream, model, centering="auto"):
        if centering == "auto":
            centering = "linear" if model.stability.a2_holds else "expected"
        if centering == "linear":
            return cls.linear(stream, model)
        if centering == "expected":
            return cls.expected(stream, model)
        if centering == "none":
            return cls.uncentered(stream)
        raise ValueError(f"unknown centering {centering!r}")

    @property
    def d(self):
        return self.stream.d

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = self.stream.counts(t) - self.drift(t)
        return np.where((t > 0)[..., None], x, 0.0)


def _n_bins(T, delta):
    if not (delta > 0 and T > 0):
        raise ValueError("delta and T must be positive")
    return int(math.floor(T / delta + 1e-9))


def increments(path: CenteredPath, delta: float, T: float, tau: float = 0.0) -> np.ndarray:
    """``X_{k delta + tau} - X_{(k-1) delta + tau}`` for ``k = 1..floor(T/delta)``."""
    m = _n_bins(T, delta)
    return np.diff(path(delta * np.arange(m + 1) + tau), axis=0)


def _required_horizon(T, delta, tau):
    return _n_bins(T, delta) * delta + max(tau, 0.0)


def covariation_empirical(path: CenteredPath, delta: float, T: float, tau: float = 0.0) -> CovariationResult:
    """``V = T^{-1} sum_k (increment k of X) (increment k of X_{tau+.})^T``.

    Bins are processed in chunks so that fine meshes over long horizons stay
    in bounded memory.  ``meta['stderr']`` holds the entrywise standard error
    ``sqrt(m) * std(products) / T``.
    """
    need = _required_horizon(T, delta, tau)
    if need > path.stream.horizon * (1 + 1e-12):
        raise DataCoverageError(
            f"covariation needs events up to t = {need:.6g}, stream horizon is "
            f"{path.stream.horizon:.6g}", required_horizon=need)
    m = _n_bins(T, delta)
    d = path.d
    s1 = np.zeros((d, d))
    s2 = np.zeros((d, d))
    for k0 in range(0, m, _CHUNK):
        k1 = min(k0 + _CHUNK, m)
        grid = delta * np.arange(k0, k1 + 1)
        a = np.diff(path(grid), axis=0)
        b = a if tau == 0 else np.diff(path(grid + tau), axis=0)
        s1 += a.T @ b
        prod = a[:, :, None] * b[:, None, :]
        s2 += np.einsum("kij,kij->ij", prod, prod)
    mean = s1 / m
    var = np.maximum(s2 / m - mean**2, 0.0)
    stderr = math.sqrt(m) * np.sqrt(var) / T
    return CovariationResult(float(delta), float(tau), s1 / T, "empirical",
                             {"n_bins": m, "stderr": stderr, "T": float(T), "centering": path.mode})


def contrast(matrix, a, b) -> float:
    """``a^T M b``."""
    return float(np.asarray(a) @ np.asarray(matrix) @ np.asarray(b))


def lln_statistic(stream: EventStream, model: HawkesModel, v_grid=None, T: float | None = None) -> float:
    """``sup_v || N_{Tv} / T - v (Id - K)^{-1} mu ||`` (Euclidean norm).

    The supremum is taken over ``v_grid`` (default 1001 points) together with
    both one-sided limits at every event time, where it is attained for a
    counting path.
    """
    T = stream.horizon if T is None else float(T)
    rate = limit_summary(model).rate
    if v_grid is None:
        v_grid = np.linspace(0.0, 1.0, 1001)
    t_grid = T * np.asarray(v_grid, dtype=float)
    best = float(np.linalg.norm(stream.counts(t_grid) / T - t_grid[:, None] / T * rate, axis=-1).max())
    inside = stream.times <= T
    if np.any(inside):
        te = stream.times[inside]
        onehot = np.zeros((te.size, stream.d))
        onehot[np.arange(te.size), stream.components[inside]] = 1.0
        after = np.cumsum(onehot, axis=0)
        before = after - onehot
        drift = te[:, None] / T * rate
        for n in (after, before):
            best = max(best, float(np.linalg.norm(n / T - drift, axis=-1).max()))
    return best


def clt_samples(streams, model: HawkesModel, v: float = 1.0, psi=None) -> np.ndarray:
    """One row ``T^{-1/2} (N_{Tv} - E(N_{Tv}))`` per stream (``T`` = stream horizon)."""
    ec = ExpectedCounts(model, psi)
    rows = []
    for s in streams:
        T = s.horizon
        if v == 0:
            rows.append(np.zeros(s.d))
            continue
        t = v * T
        rows.append((s.counts(t) - ec(t, extrapolate=True)) / math.sqrt(T))
    return np.array(rows)


def validation_summary(model: HawkesModel, seed, T, delta, tau, statistic, tolerance, passed) -> dict:
    return {"model_hash": model.fingerprint(), "seed": seed, "T": T, "delta": delta,
            "tau": tau, "statistic": statistic, "tolerance": tolerance, "pass": bool(passed)}


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
