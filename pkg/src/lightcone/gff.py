"""Free-boundary Gaussian free field sampling and arc averages.

Fields are sampled on a truncated strip [-M, M] x [0, pi] in a product
cosine basis, which has Neumann behavior on the whole rectangle boundary.
With the Dirichlet inner product (f,g) = (1/2pi) int grad f . grad g, the
mode cos(a(x+M)) cos(ny) with a = m pi / (2M) has squared norm
(a^2 + n^2) M / (q_m q_n), q_0 = 1 and q_k = 2 otherwise, so independent
standard Gaussians weighted by the reciprocal square roots reproduce the
free-field covariance up to truncation.  The constant mode is dropped and
fields are reported modulo an additive constant (node average zero).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .paths import SamplePath

__all__ = [
    "FieldSample",
    "neumann_green",
    "strip_green",
    "sample_strip_gff",
    "project_h1",
    "h2_remainder",
    "arc_average",
    "arc_average_many",
    "bilinear",
]

_MAGIC = b"LCFLD01\x00"


@dataclass
class FieldSample:
    """Real field on a rectangular mesh, optionally modulo additive constant.

    ``values`` has shape (nx, ny): first index along x, second along y.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    values: np.ndarray
    mode: str = "modulo-constant"      # or "anchored"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("field values must be 2-D (nx, ny)")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("degenerate mesh box")

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    def contains(self, px, py, margin: float = 0.0) -> bool:
        return bool(np.all(px >= self.x0 + margin) and np.all(px <= self.x1 - margin)
                    and np.all(py >= self.y0 + margin) and np.all(py <= self.y1 - margin))

    def shifted(self, c: float) -> "FieldSample":
        out = FieldSample(self.x0, self.x1, self.y0, self.y1, self.values + c,
                          mode="anchored", meta=dict(self.meta))
        return out

    def to_binary(self, path) -> None:
        p = Path(path)
        with open(p, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(np.asarray(self.values, dtype="<f8").tobytes())
        sidecar = {"x0": self.x0, "x1": self.x1, "y0": self.y0, "y1": self.y1,
                   "nx": self.nx, "ny": self.ny, "mode": self.mode}
        sidecar.update({k: v for k, v in self.meta.items() if np.isscalar(v) or isinstance(v, str)})
        with open(p.with_suffix(p.suffix + ".json"), "w") as fh:
            json.dump(sidecar, fh, indent=1, sort_keys=True)

    @classmethod
    def from_binary(cls, path) -> "FieldSample":
        p = Path(path)
        raw = p.read_bytes()
        if raw[: len(_MAGIC)] != _MAGIC:
            raise ValueError(f"{p}: bad magic header")
        with open(p.with_suffix(p.suffix + ".json")) as fh:
            meta = json.load(fh)
        vals = np.frombuffer(raw[len(_MAGIC):], dtype="<f8").reshape(meta["nx"], meta["ny"])
        return cls(meta.pop("x0"), meta.pop("x1"), meta.pop("y0"), meta.pop("y1"),
                   vals.copy(), mode=meta.pop("mode"),
                   meta={k: v for k, v in meta.items() if k not in ("nx", "ny")})


def neumann_green(z: complex, w: complex) -> float:
    """Half-plane Neumann Green's function -log|z-w| - log|z-conj(w)|."""
    z, w = complex(z), complex(w)
    if z == w:
        raise ValueError("Green's function is singular on the diagonal")
    if z.imag < 0 or w.imag < 0:
        raise ValueError("points must lie in the closed upper half-plane")
    return -math.log(abs(z - w)) - math.log(abs(z - w.conjugate()))


def strip_green(z: complex, w: complex) -> float:
    """Neumann Green's function of the infinite strip R x (0, pi).

    Transported from the half-plane by the exponential; only meaningful
    against mean-zero test functions, like every modulo-constant kernel.
    """
    return neumann_green(np.exp(complex(z)), np.exp(complex(w)))


def sample_strip_gff(M: float, nx: int, ny: int, truncation, rng) -> FieldSample:
    """Free-boundary field on the truncated strip, modulo additive constant.

    ``truncation`` is the highest mode index kept in each direction (int or
    (mx, my) pair); it must stay at or below the mesh Nyquist index.
    """
    if nx < 8 or ny < 8:
        raise ValueError("mesh must be at least 8x8")
    if isinstance(truncation, (tuple, list)):
        mx, my = int(truncation[0]), int(truncation[1])
    else:
        mx = my = int(truncation)
    if mx > nx - 1 or my > ny - 1:
        raise ValueError(f"truncation ({mx},{my}) beyond mesh resolution ({nx - 1},{ny - 1})")
    if mx < 1 or my < 0:
        raise ValueError("need at least one horizontal mode")
    xs = np.linspace(-M, M, nx)
    ys = np.linspace(0.0, math.pi, ny)
    a = np.arange(mx + 1) * math.pi / (2.0 * M)
    cx = np.cos(np.outer(xs + M, a))                    # (nx, mx+1)
    cy = np.cos(np.outer(np.arange(my + 1), ys)).T      # (ny, my+1)
    lam = a[:, None] ** 2 + np.arange(my + 1)[None, :] ** 2
    q = lambda k: np.where(k == 0, 1.0, 2.0)
    qm = q(np.arange(mx + 1))[:, None]
    qn = q(np.arange(my + 1))[None, :]
    with np.errstate(divide="ignore"):
        amp = np.sqrt(qm * qn / (lam * M))
    amp[0, 0] = 0.0                                     # drop the constant mode
    coeff = rng.standard_normal((mx + 1, my + 1)) * amp
    vals = cx @ coeff @ cy.T
    vals -= vals.mean()
    return FieldSample(-M, M, 0.0, math.pi, vals, mode="modulo-constant",
                       meta={"M": M, "truncation": (mx, my), "basis": "neumann-cosine"})


def project_h1(field: FieldSample) -> SamplePath:
    """Average over each vertical line: the constant-on-vertical-lines part."""
    means = field.values.mean(axis=1)
    return SamplePath(t0=field.x0, dt=field.hx, values=means,
                      meta={"kind": "h1-projection"})


def h2_remainder(field: FieldSample) -> FieldSample:
    """The part with zero mean on every vertical line."""
    vals = field.values - field.values.mean(axis=1, keepdims=True)
    return FieldSample(field.x0, field.x1, field.y0, field.y1, vals,
                       mode=field.mode, meta={"kind": "h2-projection", **field.meta})


def bilinear(field: FieldSample, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of the field at arbitrary points inside the mesh."""
    gx = (np.asarray(px, float) - field.x0) / field.hx
    gy = (np.asarray(py, float) - field.y0) / field.hy
    ix = np.clip(gx.astype(int), 0, field.nx - 2)
    iy = np.clip(gy.astype(int), 0, field.ny - 2)
    fx = gx - ix
    fy = gy - iy
    v = field.values
    return ((1 - fx) * (1 - fy) * v[ix, iy] + fx * (1 - fy) * v[ix + 1, iy]
            + (1 - fx) * fy * v[ix, iy + 1] + fx * fy * v[ix + 1, iy + 1])


def arc_average_many(field: FieldSample, centers_x, centers_y, radius: float,
                     arc: str = "circle", n_theta: int = 32) -> np.ndarray:
    """Arc averages around many centers at once (midpoint rule in angle)."""
    if arc == "circle":
        theta = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    elif arc == "semicircle":
        theta = (np.arange(n_theta) + 0.5) * (math.pi / n_theta)
    else:
        raise ValueError(f"unknown arc kind {arc!r}")
    cx = np.asarray(centers_x, float)[..., None]
    cy = np.asarray(centers_y, float)[..., None]
    px = cx + radius * np.cos(theta)
    py = cy + radius * np.sin(theta)
    if not field.contains(px, py):
        raise ValueError("arc leaves the mesh")
    return bilinear(field, px, py).mean(axis=-1)


def arc_average(field: FieldSample, center: complex, radius: float,
                arc: str = "circle", n_theta: int = 32) -> float:
    """Average of the field along a circle or boundary semicircle."""
    c = complex(center)
    return float(arc_average_many(field, np.array([c.real]), np.array([c.imag]),
                                  radius, arc=arc, n_theta=n_theta)[0])
