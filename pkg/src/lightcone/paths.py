"""Sample paths on uniform grids and their excursion/local-time structure."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SamplePath", "ExcursionSet", "Excursion", "LocalTimeProfile"]

_MAGIC = b"LCPATH01"


@dataclass
class SamplePath:
    """Real-valued path on the uniform grid t0 + k*dt, k = 0..len(values)-1.

    ``meta`` records named parameters (delta, kappa, seed, ...).  Array-valued
    entries (e.g. the driving Brownian path of an approximate Bessel process)
    are allowed but are dropped by the JSON sidecar on serialization.
    """

    t0: float
    dt: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError("empty path")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def duration(self) -> float:
        return self.dt * (self.values.size - 1)

    def to_csv(self, path) -> None:
        data = np.column_stack([self.times, self.values])
        np.savetxt(path, data, delimiter=",", header="t,value", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, meta: dict | None = None) -> "SamplePath":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        t = np.atleast_2d(data)[:, 0]
        v = np.atleast_2d(data)[:, 1]
        dt = float(t[1] - t[0]) if t.size > 1 else 1.0
        return cls(t0=float(t[0]), dt=dt, values=v, meta=dict(meta or {}))

    def to_binary(self, path) -> None:
        """Little-endian float64 column plus a JSON sidecar ``<path>.json``."""
        p = Path(path)
        with open(p, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(np.asarray(self.values, dtype="<f8").tobytes())
        sidecar = {"t0": self.t0, "dt": self.dt, "n": int(self.values.size)}
        sidecar.update({k: v for k, v in self.meta.items() if np.isscalar(v) or isinstance(v, str)})
        with open(p.with_suffix(p.suffix + ".json"), "w") as fh:
            json.dump(sidecar, fh, indent=1, sort_keys=True)

    @classmethod
    def from_binary(cls, path) -> "SamplePath":
        p = Path(path)
        raw = p.read_bytes()
        if raw[: len(_MAGIC)] != _MAGIC:
            raise ValueError(f"{p}: bad magic header")
        values = np.frombuffer(raw[len(_MAGIC):], dtype="<f8")
        with open(p.with_suffix(p.suffix + ".json")) as fh:
            meta = json.load(fh)
        t0, dt = meta.pop("t0"), meta.pop("dt")
        meta.pop("n", None)
        return cls(t0=t0, dt=dt, values=values.copy(), meta=meta)


@dataclass(frozen=True)
class Excursion:
    start: int          # index of the first value at or above threshold
    end: int            # index one past the last such value
    maximum: float
    duration: float

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass
class ExcursionSet:
    """Maximal intervals where a path stays at or above the zero threshold."""

    excursions: list
    threshold: float

    def __len__(self) -> int:
        return len(self.excursions)

    def durations(self) -> np.ndarray:
        return np.array([e.duration for e in self.excursions])

    def maxima(self) -> np.ndarray:
        return np.array([e.maximum for e in self.excursions])

    def count_completed_by(self, index: int, min_duration: float) -> int:
        """Number of excursions with duration >= min_duration finished by grid index."""
        return sum(1 for e in self.excursions if e.end <= index and e.duration >= min_duration)


@dataclass
class LocalTimeProfile:
    """Unnormalized local time at zero accumulated along the grid.

    ``ell[k]`` counts excursions (durations >= finest epsilon) completed by
    grid index k, scaled by epsilon^(1 - delta/2).  The normalization constant
    of the underlying excursion measure is unknown, so only ratios and
    exponents of ``ell`` are meaningful.
    """

    times: np.ndarray
    ell: np.ndarray
    epsilon_ladder: np.ndarray
    ladder_values: dict = field(default_factory=dict)   # epsilon -> terminal ell

    def __post_init__(self):
        if np.any(np.diff(self.ell) < 0):
            raise ValueError("local time must be nondecreasing")

    def inverse(self, u: float) -> float:
        """Right-continuous inverse T_u = inf{t : ell(t) > u}; inf over empty set is +inf."""
        idx = np.searchsorted(self.ell, u, side="right")
        if idx >= self.times.size:
            return np.inf
        return float(self.times[idx])
