"""Hawkes model and event stream containers, with CSV round-tripping."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import StabilityError
from .kernels import KernelMatrix, StabilityReport, stability_report


@dataclass(frozen=True, eq=False)
class HawkesModel:
    """Baselines ``mu`` (events/second) and kernel matrix ``kernels``.

    With ``asymptotic=True`` construction fails unless rho(K) < 1.
    """

    mu: np.ndarray
    kernels: KernelMatrix
    asymptotic: bool = False
    stability: StabilityReport = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).ravel()
        if mu.size != self.kernels.d:
            raise ValueError(f"mu has {mu.size} entries, kernel matrix is {self.kernels.d}x{self.kernels.d}")
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            raise ValueError("baselines must be finite and nonnegative")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        rep = stability_report(self.kernels)
        object.__setattr__(self, "stability", rep)
        if self.asymptotic and not rep.a1_holds:
            raise StabilityError("model flagged for asymptotic use violates A1", rep.spectral_radius)

    @property
    def d(self) -> int:
        return self.kernels.d

    @property
    def K(self) -> np.ndarray:
        return self.stability.K

    def require_stable(self):
        if not self.stability.a1_holds:
            raise StabilityError("rho(K) < 1 required", self.stability.spectral_radius)

    def scaled(self, c: float) -> "HawkesModel":
        return HawkesModel(c * self.mu, self.kernels, self.asymptotic)

    def permuted(self, perm) -> "HawkesModel":
        """Relabel components: new component ``k`` is old component ``perm[k]``."""
        perm = list(perm)
        e = self.kernels.entries
        rows = tuple(tuple(e[perm[i]][perm[j]] for j in range(self.d)) for i in range(self.d))
        return HawkesModel(self.mu[perm], KernelMatrix(rows), self.asymptotic)

    def to_config(self) -> dict:
        return {"model": "hawkes", "mu": self.mu.tolist(), "kernels": self.kernels.to_config()}

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_config(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class EventStream:
    """Marked events on ``(0, horizon]``; components are 0-based internally."""

    horizon: float
    times: np.ndarray
    components: np.ndarray
    d: int

    def __post_init__(self):
        t = np.array(self.times, dtype=float).ravel()
        c = np.array(self.components, dtype=np.int64).ravel()
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if t.size != c.size:
            raise ValueError("times and components differ in length")
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ValueError("event times must be strictly increasing")
            if t[0] <= 0 or t[-1] > self.horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if c.min() < 0 or c.max() >= self.d:
                raise ValueError("component index out of range")
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "components", c)

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        return (isinstance(other, EventStream) and self.horizon == other.horizon
                and self.d == other.d and np.array_equal(self.times, other.times)
                and np.array_equal(self.components, other.components))

    @cached_property
    def by_component(self):
        return [self.times[self.components == i] for i in range(self.d)]

    def counts(self, t) -> np.ndarray:
        """``N_t`` (right-continuous), shape ``t.shape + (d,)``."""
        t = np.asarray(t, dtype=float)
        return np.stack([np.searchsorted(ti, t, side="right") for ti in self.by_component],
                        axis=-1).astype(float)

    def total_counts(self) -> np.ndarray:
        return np.bincount(self.components, minlength=self.d).astype(float)

    def permuted(self, perm) -> "EventStream":
        """Relabel so that old component ``perm[k]`` becomes ``k``."""
        inv = np.argsort(perm)
        return EventStream(self.horizon, self.times, inv[self.components], self.d)

    def restricted(self, horizon) -> "EventStream":
        keep = self.times <= horizon
        return EventStream(horizon, self.times[keep], self.components[keep], self.d)


def write_events_csv(stream: EventStream, path) -> None:
    """Write ``time,component`` rows (components 1-based, 17 significant digits)."""
    with open(path, "w", newline="") as fh:
        fh.write("time,component\n")
        for t, c in zip(stream.times.tolist(), stream.components.tolist()):
            fh.write(f"{t:.17g},{c + 1}\n")


def read_events_csv(path, horizon: float, d: int | None = None) -> EventStream:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["time", "component"]:
            raise ValueError(f"{path}: expected header 'time,component', got {header!r}")
        times, comps = [], []
        for row in reader:
            if not row:
                continue
            times.append(float(row[0]))
            comps.append(int(row[1]) - 1)
    if d is None:
        d = max(comps) + 1 if comps else 1
    return EventStream(horizon, np.array(times), np.array(comps, dtype=np.int64), d)


def events_path_for(base: Path, k: int, n: int) -> Path:
    """Per-replica file name: ``base`` itself for a single replica."""
    base = Path(base)
    if n == 1:
        return base
    return base.with_name(f"{base.stem}_{k:04d}{base.suffix or '.csv'}")
