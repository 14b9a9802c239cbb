"""Kernel matrices, their L1 norms, convolution powers and resolvent series.

Every kernel is a nonnegative causal function on [0, inf).  Three variants
are supported: the zero kernel, ``alpha * exp(-beta t)`` and a kernel
tabulated on a uniform grid (linear interpolation between nodes, zero after
the last node).

Grid convolutions use the trapezoidal rule, so for smooth kernels every
tabulated object (phi_n, psi, F) is second-order accurate in the step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import fft as sfft

from .errors import (
    GridError,
    IntegrabilityError,
    SpectralRadiusError,
    StabilityError,
)

A1_MARGIN = 1e-9
DEFAULT_STEP = 1e-3
DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


class Kernel:
    """Common interface of the three kernel variants."""

    def __call__(self, t):
        raise NotImplementedError

    def l1(self) -> float:
        raise NotImplementedError

    def tail_sup(self, u):
        """``sup_{x >= u} phi(x)``, vectorised over ``u >= 0``."""
        raise NotImplementedError

    def sample(self, step: float, n: int) -> np.ndarray:
        return np.asarray(self(step * np.arange(n)), dtype=float)

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def support(self) -> float:
        return math.inf

    def decay_scale(self) -> float:
        """Time scale after which the kernel is negligible."""
        raise NotImplementedError

    def a2_holds(self) -> bool:
        return True

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroKernel(Kernel):
    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def l1(self):
        return 0.0

    def tail_sup(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    @property
    def is_zero(self):
        return True

    @property
    def support(self):
        return 0.0

    def decay_scale(self):
        return 0.0

    def to_dict(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class ExpKernel(Kernel):
    """``alpha * exp(-beta * t)`` on ``t >= 0``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"exponential kernel needs beta > 0, got {self.beta}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"exponential kernel needs alpha >= 0, got {self.alpha}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.alpha * np.exp(-self.beta * np.maximum(t, 0.0))
        return np.where(t >= 0, out, 0.0)

    def l1(self):
        return self.alpha / self.beta

    def tail_sup(self, u):
        return self(np.maximum(np.asarray(u, dtype=float), 0.0))

    @property
    def is_zero(self):
        return self.alpha == 0.0

    def decay_scale(self):
        return 1.0 / self.beta

    def to_dict(self):
        return {"type": "exp", "alpha": float(self.alpha), "beta": float(self.beta)}


@dataclass(frozen=True, eq=False)
class TabulatedKernel(Kernel):
    """Kernel given by its values at ``step * k``, ``k = 0..len(values)-1``."""

    step: float
    values: np.ndarray

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("tabulated kernel needs step > 0")
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("tabulated kernel needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise IntegrabilityError("tabulated kernel has non-finite values")
        if np.any(vals < 0):
            raise ValueError("kernel values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        # reverse cumulative max: suffix[k] = max(values[k:])
        suffix = np.maximum.accumulate(vals[::-1])[::-1].copy()
        suffix.setflags(write=False)
        object.__setattr__(self, "_suffix_max", suffix)

    def __eq__(self, other):
        return (
            isinstance(other, TabulatedKernel)
            and self.step == other.step
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.step, self.values.tobytes()))

    @property
    def times(self):
        return self.step * np.arange(self.values.size)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.times, self.values, left=0.0, right=0.0)
        return np.where(t < 0, 0.0, out)

    def l1(self):
        val = float(np.trapezoid(self.values, dx=self.step))
        if not math.isfinite(val):
            raise IntegrabilityError("non-finite quadrature of tabulated kernel")
        return val

    def tail_sup(self, u):
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        n = self.values.size
        idx = np.ceil(u / self.step - 1e-12).astype(np.int64)
        node_max = np.where(idx < n, self._suffix_max[np.minimum(idx, n - 1)], 0.0)
        return np.maximum(node_max, self(u))

    def sample(self, step, n):
        if step == self.step:
            out = np.zeros(n)
            m = min(n, self.values.size)
            out[:m] = self.values[:m]
            return out
        return super().sample(step, n)

    @property
    def is_zero(self):
        return not np.any(self.values)

    @property
    def support(self):
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return 0.0
        return float(min(nz[-1] + 1, self.values.size - 1) * self.step)

    def decay_scale(self):
        return self.support

    def a2_holds(self):
        # relative weight of the last decile of t^{1/2} phi(t)
        w = np.sqrt(self.times) * self.values
        total = w.sum()
        if total == 0:
            return True
        cut = int(0.9 * w.size)
        return bool(w[cut:].sum() / total < 1e-6)

    def to_dict(self):
        return {"type": "tab", "h": float(self.step), "values": self.values.tolist()}


def kernel_from_dict(cfg) -> Kernel:
    """Build a kernel from a config entry ``{type: zero|exp|tab, ...}``."""
    if cfg is None or cfg == 0:
        return ZeroKernel()
    if not isinstance(cfg, dict) or "type" not in cfg:
        raise ValueError(f"kernel config must be a mapping with a 'type' key: {cfg!r}")
    kind = cfg["type"]
    if kind == "zero":
        return ZeroKernel()
    if kind == "exp":
        return ExpKernel(float(cfg["alpha"]), float(cfg["beta"]))
    if kind == "tab":
        return TabulatedKernel(float(cfg["h"]), np.asarray(cfg["values"], dtype=float))
    raise ValueError(f"unknown kernel type {kind!r}")


def shifted_kernel(kernel: Kernel, shift: float, step: float, horizon: float) -> TabulatedKernel:
    """Tabulate ``kernel * delta_shift``, i.e. ``t -> kernel(t - shift)``.

    ``shift`` must be a multiple of ``step``.  The node at the jump carries the
    midpoint of the left and right limits so that the trapezoid mass of the
    result is exactly the shifted mass of the original kernel.
    """
    m = shift / step
    if shift < 0 or abs(m - round(m)) > 1e-9:
        raise GridError("shift must be a nonnegative multiple of the grid step")
    m = int(round(m))
    n = int(round(horizon / step)) + 1
    vals = np.zeros(n)
    base = kernel.sample(step, max(n - m, 0))
    vals[m:] = base
    if m > 0:
        vals[m] = 0.5 * base[0]
    return TabulatedKernel(step, vals)


# ---------------------------------------------------------------------------
# Kernel matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ValueError("kernel matrix must be square with d >= 1")
        for r in rows:
            for k in r:
                if not isinstance(k, Kernel):
                    raise TypeError(f"entry {k!r} is not a Kernel")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def zeros(cls, d):
        return cls(tuple(tuple(ZeroKernel() for _ in range(d)) for _ in range(d)))

    @classmethod
    def from_config(cls, rows) -> "KernelMatrix":
        return cls(tuple(tuple(kernel_from_dict(c) for c in r) for r in rows))

    def to_config(self):
        return [[k.to_dict() for k in r] for r in self.entries]

    @property
    def d(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def sample(self, step, n) -> np.ndarray:
        out = np.zeros((n, self.d, self.d))
        for i, row in enumerate(self.entries):
            for j, k in enumerate(row):
                if not k.is_zero:
                    out[:, i, j] = k.sample(step, n)
        return out

    def evaluate(self, t) -> np.ndarray:
        """Matrix ``phi(t)`` for scalar ``t``."""
        return np.array([[float(k(t)) for k in row] for row in self.entries])

    def exp_params(self):
        """``(alpha, beta)`` arrays if every entry is zero or exponential, else None."""
        d = self.d
        alpha = np.zeros((d, d))
        beta = np.ones((d, d))
        for i, row in enumerate(self.entries):
            for j, k in enumerate(row):
                if isinstance(k, ExpKernel):
                    alpha[i, j], beta[i, j] = k.alpha, k.beta
                elif not isinstance(k, ZeroKernel):
                    return None
        return alpha, beta

    def decay_scale(self) -> float:
        return max((k.decay_scale() for r in self.entries for k in r if not k.is_zero), default=0.0)


def l1_matrix(km: KernelMatrix) -> np.ndarray:
    """Matrix K of kernel integrals."""
    K = np.array([[k.l1() for k in row] for row in km.entries], dtype=float)
    if not np.all(np.isfinite(K)):
        raise IntegrabilityError("kernel integral is not finite")
    return K


def spectral_radius(K, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Spectral radius of a nonnegative matrix by power iteration.

    For ``x > 0`` the Collatz-Wielandt ratios ``min (Kx)_i / x_i`` and
    ``max (Kx)_i / x_i`` bracket rho(K); iteration stops once the bracket is
    narrower than ``tol * max(1, rho)``.  Cyclic matrices (several eigenvalues
    on the spectral circle) never close the bracket, so a second pass iterates
    on ``K + s I`` with ``s`` the largest row sum.  Defective matrices whose
    iteration stagnates fall back to a dense eigenvalue solve.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if not np.all(np.isfinite(K)) or np.any(K < 0):
        raise ValueError("spectral radius expects a finite nonnegative matrix")
    if not np.any(K):
        return 0.0

    def iterate(M, shift, n_iter):
        x = np.ones(M.shape[0]) / math.sqrt(M.shape[0])
        prev = -1.0
        flat = 0
        for _ in range(n_iter):
            y = M @ x
            norm = float(np.linalg.norm(y))
            if norm == 0.0:
                return 0.0, x, True
            if np.all(x > 0):
                r = y / x
                lo, hi = float(r.min()), float(r.max())
                if hi - lo <= tol * max(1.0, hi - shift):
                    return 0.5 * (lo + hi) - shift, x, True
            # a norm that no longer moves while the bracket stays open means stagnation
            flat = flat + 1 if abs(norm - prev) <= tol * 1e-3 * max(1.0, norm) else 0
            if flat >= 50:
                break
            prev = norm
            x = y / norm
        return prev - shift, x, False

    rho, x, ok = iterate(K, 0.0, max(max_iter // 100, 1))
    if ok:
        return max(rho, 0.0)
    s = float(K.sum(axis=1).max())
    rho, x, ok = iterate(K + s * np.eye(K.shape[0]), s, max_iter)
    if ok:
        return max(rho, 0.0)
    try:
        return float(np.abs(np.linalg.eigvals(K)).max())
    except np.linalg.LinAlgError as exc:
        raise SpectralRadiusError("power iteration did not converge", last_iterate=x,
                                  last_estimate=rho) from exc


@dataclass(frozen=True, eq=False)
class StabilityReport:
    K: np.ndarray
    spectral_radius: float
    a1_holds: bool
    a2_holds: bool


def stability_report(km: KernelMatrix) -> StabilityReport:
    K = l1_matrix(km)
    rho = spectral_radius(K)
    a2 = all(k.a2_holds() for r in km.entries for k in r)
    return StabilityReport(K=K, spectral_radius=rho, a1_holds=rho < 1 - A1_MARGIN, a2_holds=a2)


# ---------------------------------------------------------------------------
# Sampled matrix functions and grid convolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledMatrixFunction:
    """A d x d matrix function tabulated at ``step * k``, ``k = 0..n-1``.

    ``values`` has shape ``(n, d, d)``.  ``meta`` carries series bookkeeping
    (``n_terms``, ``truncation_bound``, ``tail_mass`` and warnings).
    """

    step: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None, None]
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError("values must have shape (n, d, d)")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled function has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def horizon(self):
        """Time of the last grid node."""
        return self.step * (self.n - 1)

    @property
    def times(self):
        return self.step * np.arange(self.n)

    def integral(self) -> np.ndarray:
        return np.trapezoid(self.values, dx=self.step, axis=0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = self.values.reshape(self.n, -1)
        out = np.stack([np.interp(t, self.times, flat[:, k], left=0.0, right=0.0)
                        for k in range(flat.shape[1])], axis=-1)
        return out.reshape(t.shape + (self.d, self.d))

    def scalar(self) -> np.ndarray:
        if self.d != 1:
            raise ValueError("not a scalar function")
        return self.values[:, 0, 0]


def _causal_conv(a, b, step, b_hat=None, nfft=None):
    """Trapezoid-rule causal convolution of (n,d,d) arrays, both sampled at ``step``.

    ``(a*b)(t_k) = step * [sum_{m=0..k} a_{k-m} b_m - (a_k b_0 + a_0 b_k)/2]``
    """
    n = a.shape[0]
    if nfft is None:
        nfft = sfft.next_fast_len(2 * n - 1, real=True)
    A = sfft.rfft(a, nfft, axis=0)
    B = sfft.rfft(b, nfft, axis=0) if b_hat is None else b_hat
    full = sfft.irfft(np.einsum("fij,fjk->fik", A, B), nfft, axis=0)[:n]
    full -= 0.5 * (np.einsum("kij,jl->kil", a, b[0]) + np.einsum("ij,kjl->kil", a[0], b))
    full *= step
    full[0] = 0.0
    np.maximum(full, 0.0, out=full)
    return full


def convolve(a: SampledMatrixFunction, b: SampledMatrixFunction) -> SampledMatrixFunction:
    """Matrix-valued causal convolution ``t -> int_0^t a(t-s) b(s) ds`` on the grid."""
    if a.d != b.d:
        raise GridError(f"dimension mismatch: {a.d} vs {b.d}")
    if not math.isclose(a.step, b.step, rel_tol=1e-12):
        raise GridError(f"step mismatch: {a.step} vs {b.step}")
    n = min(a.n, b.n)
    return SampledMatrixFunction(a.step, _causal_conv(a.values[:n], b.values[:n], a.step))


def _grid_size(step, horizon):
    if not (step > 0 and horizon > 0):
        raise ValueError("step and horizon must be positive")
    return int(round(horizon / step)) + 1


def default_grid(km: KernelMatrix, step: float = DEFAULT_STEP):
    """Default ``(step, horizon)`` for resolvent tabulation.

    The horizon is 20 resolvent decay scales: the kernel time scale inflated
    by ``1 / (1 - rho)``.
    """
    rep = stability_report(km)
    scale = km.decay_scale()
    if scale == 0:
        return step, 1.0
    if not rep.a1_holds:
        raise StabilityError("A1 violated", rep.spectral_radius)
    return step, 20.0 * scale / (1.0 - rep.spectral_radius)


def _resolvent(phi, K, step, tol, max_terms, keep_terms):
    """Partial sums of ``sum_{n>=1} phi^{*n}`` with geometric tail control."""
    d = phi.shape[1]
    G = np.linalg.inv(np.eye(d) - K)
    n = phi.shape[0]
    nfft = sfft.next_fast_len(2 * n - 1, real=True)
    phi_hat = sfft.rfft(phi, nfft, axis=0)
    term = phi.copy()
    psi = phi.copy()
    Kn = K.copy()
    terms = [term] if keep_terms else None
    n_terms = 1
    while True:
        tail = Kn @ K @ G  # sum_{m > n} K^m
        if tail.max(initial=0.0) < tol and term.max(initial=0.0) < tol:
            break
        if n_terms >= max_terms:
            warnings.warn(f"resolvent series stopped at max_terms={max_terms}", RuntimeWarning)
            break
        # phi_{n+1} = phi * phi_n (phi on the left)
        B = sfft.rfft(term, nfft, axis=0)
        full = sfft.irfft(np.einsum("fij,fjk->fik", phi_hat, B), nfft, axis=0)[:n]
        full -= 0.5 * (np.einsum("kij,jl->kil", phi, term[0]) + np.einsum("ij,kjl->kil", phi[0], term))
        full *= step
        full[0] = 0.0
        np.maximum(full, 0.0, out=full)
        term = full
        psi += term
        Kn = Kn @ K
        n_terms += 1
        if keep_terms:
            terms.append(term)
    return psi, n_terms, tail, terms


def _tail_beyond(values, step):
    """Mass past the last node, extrapolating each entry's decay over the final tenth."""
    n = values.shape[0]
    lag = max(n // 10, 1)
    if n <= lag:
        return np.where(values[-1] > 0, np.inf, 0.0)
    end, before = values[-1], values[-1 - lag]
    out = np.zeros(end.shape)
    # values at round-off level carry no decay information
    floor = 1e-12 * float(np.abs(values).max(initial=0.0))
    pos = end > floor
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.log(before[pos] / end[pos]) / (lag * step)
    out[pos] = np.where(rate > 0, end[pos] / rate, np.inf)
    return out


def _attach_tail_check(values, step, scale, tol, what):
    tail = float(_tail_beyond(values, step).max(initial=0.0))
    warn = None
    if tail > max(10 * tol, 1e-6 * max(scale, 1.0)):
        warn = (f"{what}: mass beyond the tabulated horizon ~ {tail:.3g}; "
                "increase the horizon")
        warnings.warn(warn, RuntimeWarning, stacklevel=3)
    return tail, warn


def psi_series(km: KernelMatrix, step: float | None = None, horizon: float | None = None,
               tol: float = DEFAULT_TOL, max_terms: int = 10_000,
               keep_terms: bool = False) -> SampledMatrixFunction:
    """Tabulate ``psi = sum_{n>=1} phi_n`` on ``[0, horizon]``.

    Terms are added until both the sup of the last term and every entry of the
    geometric tail bound ``K^{n+1} (Id - K)^{-1}`` fall below ``tol``.
    """
    rep = stability_report(km)
    if not rep.a1_holds:
        raise StabilityError("psi series needs rho(K) < 1", rep.spectral_radius)
    dstep, dhor = default_grid(km)
    step = dstep if step is None else step
    horizon = dhor if horizon is None else horizon
    n = _grid_size(step, horizon)
    phi = km.sample(step, n)
    psi, n_terms, tail, terms = _resolvent(phi, rep.K, step, tol, max_terms, keep_terms)
    expected = np.linalg.inv(np.eye(km.d) - rep.K) - np.eye(km.d)
    tail_mass, warn = _attach_tail_check(psi, step, float(np.abs(expected).max()), tol, "psi")
    meta = {"n_terms": n_terms, "truncation_bound": tail, "tail_mass": tail_mass,
            "warning": warn, "tol": tol}
    if keep_terms:
        meta["terms"] = terms
    return SampledMatrixFunction(step, psi, meta)


def cross_series_F(h_ker: Kernel, g_ker: Kernel, step: float = DEFAULT_STEP,
                   horizon: float | None = None, tol: float = DEFAULT_TOL,
                   max_terms: int = 10_000) -> SampledMatrixFunction:
    """Tabulate the scalar series ``F = sum_{n>=1} (h*g)^{*n}``."""
    kh, kg = h_ker.l1(), g_ker.l1()
    prod = kh * kg
    if not prod < 1 - A1_MARGIN:
        raise StabilityError("F series needs |h|_1 |g|_1 < 1", prod)
    if horizon is None:
        scale = max(h_ker.decay_scale(), g_ker.decay_scale(), step)
        horizon = 20.0 * 2 * scale / (1.0 - math.sqrt(prod))
    n = _grid_size(step, horizon)
    hs = h_ker.sample(step, n)[:, None, None]
    gs = g_ker.sample(step, n)[:, None, None]
    hg = _causal_conv(hs, gs, step)
    K = np.array([[prod]])
    F, n_terms, tail, _ = _resolvent(hg, K, step, tol, max_terms, False)
    tail_mass, warn = _attach_tail_check(F, step, prod / (1 - prod), tol, "F")
    return SampledMatrixFunction(step, F, {"n_terms": n_terms, "truncation_bound": tail,
                                           "tail_mass": tail_mass, "warning": warn, "tol": tol})


@dataclass(frozen=True)
class ExpF:
    """``F(t) = coeff * (exp(-rho2 t) - exp(-rho1 t))`` for ``t >= 0``."""

    rho1: float
    rho2: float
    coeff: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tp = np.maximum(t, 0.0)
        out = self.coeff * (np.exp(-self.rho2 * tp) - np.exp(-self.rho1 * tp))
        return np.where(t >= 0, out, 0.0)

    def integral(self) -> float:
        if self.coeff == 0:
            return 0.0
        return self.coeff * (1.0 / self.rho2 - 1.0 / self.rho1)


def exp_F(alpha1: float, beta1: float, alpha2: float, beta2: float) -> ExpF:
    """Closed form of F for ``h = alpha1 e^{-beta1 t}``, ``g = alpha2 e^{-beta2 t}``."""
    if not (beta1 > 0 and beta2 > 0 and alpha1 >= 0 and alpha2 >= 0):
        raise ValueError("need beta > 0 and alpha >= 0")
    prod = alpha1 * alpha2 / (beta1 * beta2)
    if not prod < 1 - A1_MARGIN:
        raise StabilityError("closed-form F needs alpha1 alpha2 / (beta1 beta2) < 1", prod)
    disc = math.sqrt((beta1 - beta2) ** 2 + 4 * alpha1 * alpha2)
    rho1 = 0.5 * (beta1 + beta2 + disc)
    rho2 = 0.5 * (beta1 + beta2 - disc)
    coeff = 0.0 if alpha1 * alpha2 == 0 else alpha1 * alpha2 / (rho1 - rho2)
    return ExpF(rho1, rho2, coeff)


def as_matrix_function(values: Sequence, step: float) -> SampledMatrixFunction:
    return SampledMatrixFunction(step, np.asarray(values, dtype=float))
