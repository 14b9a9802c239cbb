"""Deterministic limit objects: LLN rate, expected counts, CLT covariance and
the cross-scale covariation ``v(delta, tau)`` of increments."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import ResolutionError, StabilityError, TruncationError
from .kernels import SampledMatrixFunction, psi_series
from .model import HawkesModel

MIN_STEPS_PER_DELTA = 5


@dataclass(frozen=True, eq=False)
class LimitSummary:
    rate: np.ndarray
    Sigma: np.ndarray
    Gamma: np.ndarray
    macro_cov: np.ndarray


@dataclass(frozen=True, eq=False)
class CovariationResult:
    delta: float
    tau: float
    matrix: np.ndarray
    provenance: str
    meta: dict = field(default_factory=dict)


def _gamma(model: HawkesModel) -> np.ndarray:
    rep = model.stability
    if not rep.a1_holds:
        raise StabilityError("Id - K is singular or A1 fails", rep.spectral_radius)
    return np.linalg.solve(np.eye(model.d) - rep.K, np.eye(model.d))


def limit_summary(model: HawkesModel) -> LimitSummary:
    G = _gamma(model)
    rate = G @ model.mu
    Sigma = np.diag(rate)
    return LimitSummary(rate=rate, Sigma=Sigma, Gamma=G, macro_cov=G @ Sigma @ G.T)


def resolvent(model: HawkesModel, step=None, horizon=None, tol=1e-10) -> SampledMatrixFunction:
    """``psi`` tabulated on the default (or given) grid."""
    model.require_stable()
    return psi_series(model.kernels, step=step, horizon=horizon, tol=tol)


class ExpectedCounts:
    """``E(N_t) = t mu + (int_0^t psi(t-s) s ds) mu`` from one tabulation of psi.

    The convolution equals the double primitive of psi, so it is accumulated
    with two cumulative trapezoid passes and interpolated linearly.
    """

    def __init__(self, model: HawkesModel, psi: SampledMatrixFunction | None = None):
        model.require_stable()
        self.model = model
        self.psi = resolvent(model) if psi is None else psi
        h = self.psi.step
        v = self.psi.values
        p1 = np.zeros_like(v)
        p1[1:] = np.cumsum(0.5 * h * (v[1:] + v[:-1]), axis=0)
        p2 = np.zeros_like(v)
        p2[1:] = np.cumsum(0.5 * h * (p1[1:] + p1[:-1]), axis=0)
        self._p1_mu = p1 @ model.mu
        self._p2_mu = p2 @ model.mu
        # without excitation E(N_t) = t mu holds for every t
        self.horizon = self.psi.horizon if np.any(v) else np.inf

    def __call__(self, t, extrapolate: bool = False) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("expected counts need t >= 0")
        beyond = t > self.horizon * (1 + 1e-12)
        if np.any(beyond) and not extrapolate:
            raise TruncationError(
                f"t = {float(t.max()):.6g} exceeds the psi grid horizon {self.horizon:.6g}")
        times = self.psi.times
        cols = []
        for i in range(self.model.d):
            inside = np.interp(t, times, self._p2_mu[:, i])
            # psi is negligible past the horizon, so the primitive grows linearly
            outside = self._p2_mu[-1, i] + (t - self.psi.horizon) * self._p1_mu[-1, i]
            cols.append(np.where(beyond, outside, inside))
        return t[..., None] * self.model.mu + np.stack(cols, axis=-1)


def expected_counts(model: HawkesModel, t, psi: SampledMatrixFunction | None = None,
                    extrapolate: bool = False) -> np.ndarray:
    return ExpectedCounts(model, psi)(t, extrapolate=extrapolate)


def triangle(x, delta):
    """``(1 - |x| / delta)^+``."""
    return np.maximum(1.0 - np.abs(x) / delta, 0.0)


class CovariationTheory:
    """Evaluates ``v(delta, tau)`` for any (delta, tau) from one lag function.

    With ``A = Id delta_0 + psi(s) ds`` discretised as an atom plus trapezoid
    masses ``D_k``, the double integral becomes ``sum_u gamma(u h - tau) R_u``
    where ``R_u = sum_k A_k Sigma A_{k+u}^T``.  The density-density part of R is
    a cross-correlation computed by FFT; the atom terms are added exactly.
    Only ``u >= 0`` is stored since ``R_{-u} = R_u^T``.
    """

    def __init__(self, model: HawkesModel, psi: SampledMatrixFunction | None = None):
        self.model = model
        self.summary = limit_summary(model)
        self.psi = resolvent(model) if psi is None else psi
        h = self.psi.step
        n = self.psi.n
        D = h * self.psi.values.copy()
        D[0] *= 0.5
        D[-1] *= 0.5
        sigma = np.diag(self.summary.Sigma)
        Sig = self.summary.Sigma
        E = D * np.sqrt(sigma)[None, None, :]
        nfft = sfft.next_fast_len(2 * n - 1, real=True)
        Eh = sfft.rfft(E, nfft, axis=0)
        P = sfft.irfft(np.einsum("fij,flj->fil", Eh.conj(), Eh), nfft, axis=0)[:n]
        R = P + np.einsum("ij,klj->kil", Sig, D)  # Sigma D_u^T
        R[0] += Sig + D[0] @ Sig
        R[0] = 0.5 * (R[0] + R[0].T)
        self.R = R
        self.step = h
        meta = self.psi.meta
        tail = float(meta.get("tail_mass", 0.0)) + float(np.max(meta.get("truncation_bound", 0.0)))
        mass = float(np.abs(self.psi.integral()).sum(axis=1).max(initial=0.0))
        self.error_bound = tail * float(sigma.max(initial=0.0)) * (2.0 + 2.0 * mass + tail)

    def __call__(self, delta: float, tau: float = 0.0) -> CovariationResult:
        h = self.step
        if not delta >= MIN_STEPS_PER_DELTA * h:
            raise ResolutionError(
                f"delta = {delta:.3g} is below {MIN_STEPS_PER_DELTA} grid steps (step {h:.3g})")
        n = self.R.shape[0]
        lo = int(np.ceil((tau - delta) / h))
        hi = int(np.floor((tau + delta) / h))
        mat = np.zeros((self.model.d, self.model.d))
        # u >= 0
        a, b = max(lo, 0), min(hi, n - 1)
        if a <= b:
            u = np.arange(a, b + 1)
            mat += np.tensordot(triangle(u * h - tau, delta), self.R[a:b + 1], axes=1)
        # u <= -1, stored as R_{|u|}^T
        a, b = max(-hi, 1), min(-lo, n - 1)
        if a <= b:
            u = np.arange(a, b + 1)
            mat += np.tensordot(triangle(-u * h - tau, delta), self.R[a:b + 1], axes=1).T
        return CovariationResult(float(delta), float(tau), mat, "theory",
                                 {"error_bound": self.error_bound, "step": h})

    def sweep(self, deltas, taus) -> list[CovariationResult]:
        return [self(float(dl), float(tu)) for dl in deltas for tu in taus]


def covariation_theory(model: HawkesModel, delta: float, tau: float = 0.0,
                       psi: SampledMatrixFunction | None = None) -> CovariationResult:
    return CovariationTheory(model, psi)(delta, tau)


def covariation_theory_sweep(model: HawkesModel, deltas, taus,
                             psi: SampledMatrixFunction | None = None) -> list[CovariationResult]:
    """All (delta, tau) pairs, delta-major, from a single psi tabulation."""
    return CovariationTheory(model, psi).sweep(deltas, taus)


def write_covariation_csv(results, path) -> None:
    """CSV rows ``delta,tau,i,j,value,provenance`` with 1-based i, j."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "tau", "i", "j", "value", "provenance"])
        for r in results:
            d = r.matrix.shape[0]
            for i in range(d):
                for j in range(d):
                    w.writerow([repr(r.delta), repr(r.tau), i + 1, j + 1,
                                repr(float(r.matrix[i, j])), r.provenance])


def read_covariation_csv(path) -> list[CovariationResult]:
    rows = {}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            key = (float(rec["delta"]), float(rec["tau"]), rec["provenance"])
            rows.setdefault(key, []).append((int(rec["i"]) - 1, int(rec["j"]) - 1, float(rec["value"])))
    out = []
    for (dl, tu, prov), entries in rows.items():
        d = max(max(i, j) for i, j, _ in entries) + 1
        m = np.zeros((d, d))
        for i, j, v in entries:
            m[i, j] = v
        out.append(CovariationResult(dl, tu, m, prov))
    return out
