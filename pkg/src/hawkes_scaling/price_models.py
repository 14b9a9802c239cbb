"""Tick-price models built on Hawkes processes.

``MicrostructureModel``: ``S = N1 - N2`` with ``mu = (nu, nu)`` and
cross-excitation ``phi`` only.

``LeadLagModel``: ``S1 = N1 - N2``, ``S2 = N3 - N4`` with ``mu = (mu1, mu1,
mu3, mu3)``; up (down) jumps of S2 excite up (down) jumps of S1 through ``h``
and S1 acts on S2 through ``g``.

Cross-correlograms ``C11(delta, tau)`` and ``C12(delta, tau)`` are evaluated
on a symmetric grid.  Every one-sided function becomes a discrete measure
with trapezoid node weights and the Dirac atom at 0 is an exact unit mass at
the centre node, so atoms are never smeared.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .asymptotics import triangle
from .errors import ResolutionError, StabilityError
from .kernels import (
    A1_MARGIN,
    DEFAULT_STEP,
    ExpKernel,
    Kernel,
    KernelMatrix,
    TabulatedKernel,
    ZeroKernel,
    cross_series_F,
    exp_F,
)
from .model import HawkesModel


def micro_sigma2(nu: float, x: float) -> float:
    """Macroscopic variance ``2 nu / ((1 - x)(1 + x)^2)`` of ``T^{-1/2} S_T``."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if not 0 <= x < 1:
        raise StabilityError("need 0 <= |phi|_1 < 1", x)
    return 2.0 * nu / ((1.0 - x) * (1.0 + x) ** 2)


def critical_value(xtol: float = 1e-13) -> float:
    """Root in (0, 1) of ``(1 - x)(1 + x)^2 = 1``, by bisection.

    Beyond it the cross-excitation inflates the macroscopic variance.
    """
    return optimize.bisect(lambda x: (1 - x) * (1 + x) ** 2 - 1.0, 0.1, 0.99, xtol=xtol)


@dataclass(frozen=True)
class MicrostructureModel:
    nu: float
    phi: Kernel

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if not self.phi.l1() < 1:
            raise StabilityError("microstructure model needs |phi|_1 < 1", self.phi.l1())

    @property
    def hawkes(self) -> HawkesModel:
        z = ZeroKernel()
        return HawkesModel([self.nu, self.nu], KernelMatrix(((z, self.phi), (self.phi, z))),
                           asymptotic=True)

    @property
    def sigma2(self) -> float:
        return micro_sigma2(self.nu, self.phi.l1())

    def to_config(self):
        return {"model": "microstructure", "nu": self.nu, "phi": self.phi.to_dict()}


@dataclass(frozen=True)
class LeadLagModel:
    mu1: float
    mu3: float
    h: Kernel
    g: Kernel

    def __post_init__(self):
        if self.mu1 < 0 or self.mu3 < 0:
            raise ValueError("baselines must be nonnegative")
        prod = self.h.l1() * self.g.l1()
        if not prod < 1 - A1_MARGIN:
            raise StabilityError("lead-lag model needs |h|_1 |g|_1 < 1", prod)

    @property
    def hawkes(self) -> HawkesModel:
        z, h, g = ZeroKernel(), self.h, self.g
        rows = ((z, z, h, z), (z, z, z, h), (g, z, z, z), (z, g, z, z))
        return HawkesModel([self.mu1, self.mu1, self.mu3, self.mu3], KernelMatrix(rows),
                           asymptotic=True)

    @property
    def nu1(self) -> float:
        return self.mu1 + self.h.l1() * self.mu3

    @property
    def nu2(self) -> float:
        return self.mu3 + self.g.l1() * self.mu1

    @property
    def norm_product(self) -> float:
        return self.h.l1() * self.g.l1()

    def to_config(self):
        return {"model": "leadlag", "mu1": self.mu1, "mu3": self.mu3,
                "h": self.h.to_dict(), "g": self.g.to_dict()}


@dataclass(frozen=True, eq=False)
class MacroCorrelation:
    cov: np.ndarray
    corr: float


def macro_correlation(model: LeadLagModel) -> MacroCorrelation:
    """Covariance of the Brownian limit of ``T^{-1/2}(S1, S2)``.

    The limit is ``sqrt(2) / (1 - |h||g|)^{3/2}`` times
    ``(sqrt(nu1) W1 + sqrt(nu2) |h| W2, sqrt(nu1) |g| W1 + sqrt(nu2) W2)``.
    """
    kh, kg = model.h.l1(), model.g.l1()
    a = math.sqrt(model.nu1)
    b = math.sqrt(model.nu2)
    L = np.array([[a, b * kh], [a * kg, b]])
    cov = 2.0 / (1.0 - kh * kg) ** 3 * (L @ L.T)
    u, v = L
    nu_, nv = np.linalg.norm(u), np.linalg.norm(v)
    corr = float(u @ v / (nu_ * nv)) if nu_ > 0 and nv > 0 else 0.0
    return MacroCorrelation(cov=cov, corr=corr)


S1 = np.array([1.0, -1.0, 0.0, 0.0])
S2 = np.array([0.0, 0.0, 1.0, -1.0])


class CrossCorrelogram:
    """``C11`` and ``C12`` of a lead-lag model for any ``(delta, tau)``.

    ``C11 = c gamma_delta * M * (nu1 delta_0 + nu2 h * h_check)`` and
    ``C12 = c gamma_delta * M * (nu2 h_check + nu1 g)`` with
    ``M = (delta_0 + F) * (delta_0 + F)_check`` and ``c = 2 / (1 - |h||g|)``.
    F comes from the closed form when both kernels are exponential and from
    the grid series otherwise.
    """

    def __init__(self, model: LeadLagModel, step: float | None = None,
                 horizon: float | None = None, tol: float = 1e-10):
        self.model = model
        h, g = model.h, model.g
        if step is None:
            steps = [k.step for k in (h, g) if isinstance(k, TabulatedKernel)]
            step = steps[0] if steps else DEFAULT_STEP
        if horizon is None:
            horizon = self._default_horizon()
        self.step = step
        n = int(round(horizon / step)) + 1
        self.n = n
        t = step * np.arange(n)
        if isinstance(h, (ExpKernel, ZeroKernel)) and isinstance(g, (ExpKernel, ZeroKernel)):
            a1, b1 = (h.alpha, h.beta) if isinstance(h, ExpKernel) else (0.0, 1.0)
            a2, b2 = (g.alpha, g.beta) if isinstance(g, ExpKernel) else (0.0, 1.0)
            self.F_source = "closed form"
            Fv = exp_F(a1, b1, a2, b2)(t)
        else:
            self.F_source = "series"
            Fv = cross_series_F(h, g, step, (n - 1) * step, tol).scalar()
        w = np.full(n, step)
        w[0] = w[-1] = 0.5 * step
        Ft = w * Fv
        Ft[0] += 1.0
        hm = w * h.sample(step, n)
        gm = w * g.sample(step, n)
        M = signal.fftconvolve(Ft, Ft[::-1])
        hh = signal.fftconvolve(hm, hm[::-1])
        nu1, nu2 = model.nu1, model.nu2
        q11 = nu2 * hh
        q11[n - 1] += nu1
        q12 = np.zeros(2 * n - 1)
        q12[:n] += nu2 * hm[::-1]
        q12[n - 1:] += nu1 * gm
        c = 2.0 / (1.0 - model.norm_product)
        self.m11 = c * signal.fftconvolve(M, q11)
        self.m12 = c * signal.fftconvolve(M, q12)
        self.center = 2 * n - 2

    def _default_horizon(self):
        m = self.model
        finite = [k.support for k in (m.h, m.g) if isinstance(k, TabulatedKernel)]
        scales = [k.decay_scale() for k in (m.h, m.g) if isinstance(k, ExpKernel)]
        base = 20.0 * max(scales, default=1.0) / (1.0 - math.sqrt(m.norm_product))
        return max(finite + [base])

    def _apply(self, mass, delta, tau):
        s = self.step
        if not delta >= 5 * s:
            raise ResolutionError(f"delta = {delta:.3g} is below 5 grid steps (step {s:.3g})")
        lo = max(int(np.ceil((tau - delta) / s)) + self.center, 0)
        hi = min(int(np.floor((tau + delta) / s)) + self.center, mass.size - 1)
        if lo > hi:
            return 0.0
        x = (np.arange(lo, hi + 1) - self.center) * s
        return float(triangle(tau - x, delta) @ mass[lo:hi + 1])

    def c11(self, delta: float, tau: float = 0.0) -> float:
        return self._apply(self.m11, delta, tau)

    def c12(self, delta: float, tau: float = 0.0) -> float:
        return self._apply(self.m12, delta, tau)


def c11(model: LeadLagModel, delta: float, tau: float = 0.0, correlogram=None) -> float:
    cg = CrossCorrelogram(model) if correlogram is None else correlogram
    return cg.c11(delta, tau)


def c12(model: LeadLagModel, delta: float, tau: float = 0.0, correlogram=None) -> float:
    """Limit of ``V(S1, S2_{tau+.})``; ``V(S2, S1_{tau+.})`` tends to ``c12(delta, -tau)``."""
    cg = CrossCorrelogram(model) if correlogram is None else correlogram
    return cg.c12(delta, tau)


def leadlag_asymmetry(model: LeadLagModel, delta: float, taus, correlogram=None) -> float:
    """``max_tau |C12(delta, tau) - C12(delta, -tau)|`` over a grid symmetric about 0."""
    taus = np.sort(np.asarray(taus, dtype=float))
    if not np.allclose(taus, -taus[::-1], atol=1e-12):
        raise ValueError("tau grid must be symmetric about 0")
    cg = CrossCorrelogram(model) if correlogram is None else correlogram
    return max(abs(cg.c12(delta, t) - cg.c12(delta, -t)) for t in taus)


def write_quantity_csv(rows, path) -> None:
    """Rows ``(quantity, delta, tau, value)``; scalar quantities leave delta/tau empty."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["quantity", "delta", "tau", "value"])
        for q, dl, tu, v in rows:
            w.writerow([q, "" if dl is None else repr(float(dl)),
                        "" if tu is None else repr(float(tu)), repr(float(v))])


def read_quantity_csv(path):
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            dl = float(rec["delta"]) if rec["delta"] else None
            tu = float(rec["tau"]) if rec["tau"] else None
            out.append((rec["quantity"], dl, tu, float(rec["value"])))
    return out
