"""Quantum area and boundary measures, thick and thin wedges, bead statistics.

The regularized measures use arc averages h_eps of the field:

    area     sum over nodes of eps^(gamma^2/2) exp(gamma h_eps(z)) dA,
    boundary sum over nodes of eps^(gamma^2/4) exp(gamma h_eps(x)/2) dx,

evaluated at the finest rung of an epsilon ladder, with the coarser rungs
kept for refinement diagnostics.  Adding a constant C to the field scales
the two measures by exp(gamma C) and exp(gamma C / 2) by plain algebra on
the formulas, and the tests pin that down at machine precision.

A weight-W wedge corresponds to a Bessel dimension 1 + 2W/gamma^2; thick
wedges (dimension >= 2) carry one field on the strip, thin wedges
(dimension in (0,2)) decompose into an ordered chain of beads, one per
excursion of the encoding Bessel process, sampled here from the maxima
point process with intensity proportional to t^(dimension-3) dt above a
cutoff.  The intensity constant is never asserted; all bead statistics are
cutoff-relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bessel as bessel_mod
from . import gff
from .gff import FieldSample
from .paths import SamplePath

__all__ = [
    "q_parameter",
    "weight_to_dimension",
    "WedgeSpec",
    "QuantumSurface",
    "Bead",
    "BeadedSurface",
    "LocalMeasure",
    "ConformalMap",
    "sample_thick_wedge",
    "sample_thin_wedge",
    "sample_bead",
    "quantum_area",
    "quantum_boundary_length",
    "change_coordinates",
    "perturbed_measure",
]


def q_parameter(gamma: float) -> float:
    """Background charge 2/gamma + gamma/2."""
    if not (0.0 < gamma < 2.0):
        raise ValueError(f"gamma must lie in (0,2), got {gamma}")
    return 2.0 / gamma + gamma / 2.0


def weight_to_dimension(gamma: float, W: float) -> float:
    """Bessel dimension encoding a weight-W wedge: 1 + 2 W / gamma^2."""
    if not (0.0 < gamma < 2.0):
        raise ValueError(f"gamma must lie in (0,2), got {gamma}")
    return 1.0 + 2.0 * W / (gamma * gamma)


@dataclass(frozen=True)
class WedgeSpec:
    gamma: float
    weight: float

    def __post_init__(self):
        if not (0.0 < self.gamma < 2.0):
            raise ValueError(f"gamma must lie in (0,2), got {self.gamma}")
        if self.delta <= 0.0:
            raise ValueError(
                f"weight {self.weight} gives nonpositive Bessel dimension {self.delta}")

    @property
    def delta(self) -> float:
        return weight_to_dimension(self.gamma, self.weight)

    @property
    def flavor(self) -> str:
        return "thick" if self.delta >= 2.0 else "thin"

    @property
    def q(self) -> float:
        return q_parameter(self.gamma)

    @property
    def alpha(self) -> float:
        # field strength at the origin marked point
        return self.gamma / 2.0 + self.q - self.weight / self.gamma


@dataclass
class QuantumSurface:
    field: FieldSample
    domain: str                 # "strip" | "half-plane"
    marked: tuple
    gamma: float
    meta: dict = None

    def __post_init__(self):
        if self.meta is None:
            self.meta = {}
        if self.domain not in ("strip", "half-plane"):
            raise ValueError(f"unknown domain tag {self.domain!r}")

    def shifted(self, c: float) -> "QuantumSurface":
        return QuantumSurface(self.field.shifted(c), self.domain, self.marked,
                              self.gamma, dict(self.meta))


@dataclass
class Bead:
    excursion: SamplePath
    field: FieldSample
    maximum: float
    boundary_length: float
    length_bottom: float
    length_top: float
    area: float


@dataclass
class BeadedSurface:
    beads: list
    spec: WedgeSpec
    maxima_cutoff: float
    meta: dict = None

    def __post_init__(self):
        if self.meta is None:
            self.meta = {}
        if any(b.boundary_length <= 0 for b in self.beads):
            raise ValueError("bead boundary lengths must be positive")

    def __len__(self) -> int:
        return len(self.beads)

    def boundary_lengths(self) -> np.ndarray:
        return np.array([b.boundary_length for b in self.beads])

    def maxima(self) -> np.ndarray:
        return np.array([b.maximum for b in self.beads])


@dataclass
class LocalMeasure:
    """Atomic measure on a local-time interval."""

    atoms_v: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        self.atoms_v = np.asarray(self.atoms_v, float)
        self.weights = np.asarray(self.weights, float)
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if np.any(np.diff(self.atoms_v) < 0):
            raise ValueError("atom coordinates must be nondecreasing")

    def total(self) -> float:
        return float(self.weights.sum())

    def restrict(self, lo: float, hi: float) -> "LocalMeasure":
        keep = (self.atoms_v >= lo) & (self.atoms_v <= hi)
        return LocalMeasure(self.atoms_v[keep], self.weights[keep], lo, hi)


@dataclass(frozen=True)
class ConformalMap:
    """Supported analytic maps phi from the new domain onto the old one.

    kinds: "identity"; "scale" with parameter c > 0 (z -> cz);
    "mobius" with (a, b, c, d), ad - bc > 0, z -> (az+b)/(cz+d);
    "log" (half-plane -> strip, z -> log z);
    "exp" (strip -> half-plane, z -> exp z).
    """

    kind: str
    params: tuple = ()

    def apply(self, z):
        z = np.asarray(z, complex)
        if self.kind == "identity":
            return z
        if self.kind == "scale":
            return self.params[0] * z
        if self.kind == "mobius":
            a, b, c, d = self.params
            return (a * z + b) / (c * z + d)
        if self.kind == "log":
            return np.log(z)
        if self.kind == "exp":
            return np.exp(z)
        raise ValueError(f"unsupported map family {self.kind!r}")

    def log_abs_deriv(self, z):
        z = np.asarray(z, complex)
        if self.kind == "identity":
            return np.zeros(z.shape)
        if self.kind == "scale":
            return np.full(z.shape, math.log(self.params[0]))
        if self.kind == "mobius":
            a, b, c, d = self.params
            return np.log(abs(a * d - b * c)) - 2.0 * np.log(np.abs(c * z + d))
        if self.kind == "log":
            return -np.log(np.abs(z))
        if self.kind == "exp":
            return z.real
        raise ValueError(f"unsupported map family {self.kind!r}")

    def invert(self, w):
        w = np.asarray(w, complex)
        if self.kind == "identity":
            return w
        if self.kind == "scale":
            return w / self.params[0]
        if self.kind == "mobius":
            a, b, c, d = self.params
            return (d * w - b) / (-c * w + a)
        if self.kind == "log":
            return np.exp(w)
        if self.kind == "exp":
            return np.log(w)
        raise ValueError(f"unsupported map family {self.kind!r}")


def _conditioned_positive_walk(n_pos: int, hx: float, drift: float, rng,
                               max_retries: int) -> np.ndarray:
    """Grid values of B_{2s} + drift*s on s = hx..n_pos*hx, all positive."""
    sd = math.sqrt(2.0 * hx)
    for attempt in range(max_retries):
        steps = rng.standard_normal(n_pos) * sd + drift * hx
        walk = np.cumsum(steps)
        if walk.min() > 0.0:
            return walk
    raise RuntimeError(
        f"conditioned walk rejected {max_retries} times "
        f"(drift {drift:.4f}, grid {hx:.4f}); raise max_retries or coarsen the grid")


def sample_thick_wedge(spec: WedgeSpec, M: float, nx: int, ny: int, rng,
                       truncation=None, max_retries: int = 100000) -> QuantumSurface:
    """Thick wedge on the truncated strip.

    The vertical-line average along s >= 0 is a drifted Brownian motion
    conditioned positive at every grid point (rejection sampled); along
    s < 0 it is unconditioned with the same drift.  The remainder is an
    independent free-field sample with zero mean on every vertical line.
    Both additive constants vanish on the s = 0 line by construction.
    """
    if spec.flavor != "thick":
        raise ValueError(f"weight {spec.weight} is not thick for gamma {spec.gamma}")
    drift = spec.q - spec.alpha
    if nx % 2 == 0:
        nx += 1                       # keep a node exactly at s = 0
    hx = 2.0 * M / (nx - 1)
    n_side = (nx - 1) // 2
    pos = _conditioned_positive_walk(n_side, hx, drift, rng, max_retries)
    sd = math.sqrt(2.0 * hx)
    neg = np.cumsum(rng.standard_normal(n_side) * sd - drift * hx)  # read right-to-left
    h1 = np.concatenate([neg[::-1], [0.0], pos])
    if truncation is None:
        truncation = (min(nx - 1, 2 * (nx // 2)), min(ny - 1, ny - 1))
    raw = gff.sample_strip_gff(M, nx, ny, truncation, rng)
    h2 = gff.h2_remainder(raw)
    vals = h2.values + h1[:, None]
    fld = FieldSample(-M, M, 0.0, math.pi, vals, mode="anchored",
                      meta={"M": M, "wedge_weight": spec.weight, "gamma": spec.gamma})
    return QuantumSurface(field=fld, domain="strip", marked=(-math.inf, math.inf),
                          gamma=spec.gamma,
                          meta={"weight": spec.weight, "delta": spec.delta,
                                "drift": drift, "flavor": "thick"})


def _first_passage_bes(delta_up: float, level: float, dt: float, rng,
                       max_steps: int) -> np.ndarray:
    """Full-truncation Bessel path from 0 run until it first reaches level."""
    drift = delta_up * dt
    z = 0.0
    out = [0.0]
    lvl2 = level * level
    for _ in range(max_steps):
        z = z + drift + 2.0 * math.sqrt(z if z > 0 else 0.0) * rng.standard_normal() * math.sqrt(dt)
        if z < 0.0:
            z = 0.0
        out.append(z)
        if z >= lvl2:
            break
    else:
        raise RuntimeError(f"first passage to {level} not reached in {max_steps} steps")
    arr = np.sqrt(np.array(out))
    arr[-1] = level
    return arr


def sample_bead_excursion(delta: float, maximum: float, rng, dt_rel: float = 2e-4,
                          max_steps: int = 400000) -> SamplePath:
    """One Bessel excursion conditioned on its maximum.

    Joins back to back two independent first-passage paths of dimension
    4 - delta run from 0 to the maximum; the step size scales with the
    squared maximum so every bead is resolved with the same relative error.
    """
    if not (0.0 < delta < 2.0):
        raise ValueError(f"bead excursions need delta in (0,2), got {delta}")
    dt = dt_rel * maximum * maximum
    up = _first_passage_bes(4.0 - delta, maximum, dt, rng, max_steps)
    down = _first_passage_bes(4.0 - delta, maximum, dt, rng, max_steps)
    vals = np.concatenate([up, down[::-1][1:]])
    return SamplePath(t0=0.0, dt=dt, values=vals,
                      meta={"delta": delta, "maximum": maximum, "kind": "bead-excursion"})


def _h1_from_excursion(exc: SamplePath, gamma: float, M: float, nx: int) -> np.ndarray:
    """Horizontal profile 2/gamma log(e) reparameterized to quadratic variation 2dt.

    The clock is A(s) = (4/gamma^2) int_0^s e^-2 dr; strip coordinate u
    satisfies A(sigma(u)) = 2u + const, centered so the excursion maximum
    sits at u = 0.  Beyond the simulated clock range the profile continues
    linearly with the known downward drift (truncation tails).
    """
    e = np.maximum(exc.values, 1e-300)
    inv2 = 1.0 / np.maximum(e[:-1] * e[:-1], 1e-280)
    a = np.concatenate([[0.0], np.cumsum((4.0 / gamma ** 2) * inv2 * exc.dt)])
    i_max = int(np.argmax(e))
    a_center = a[i_max]
    us = np.linspace(-M, M, nx)
    targets = 2.0 * us + a_center
    idx = np.searchsorted(a, targets).clip(1, a.size - 1)
    lo, hi = a[idx - 1], a[idx]
    frac = np.where(hi > lo, (targets - lo) / np.where(hi > lo, hi - lo, 1.0), 0.0)
    loge = np.log(e)
    prof = loge[idx - 1] + frac * (loge[idx] - loge[idx - 1])
    out = (2.0 / gamma) * prof
    inside = (targets >= a[0]) & (targets <= a[-1])
    if not inside.all():
        # reparameterized log profile drifts down at rate (2-delta)*gamma/2
        m = (2.0 - exc.meta["delta"]) * gamma / 2.0
        left = ~inside & (targets < a[0])
        right = ~inside & (targets > a[-1])
        out[left] = out[inside][0] - m * (us[inside][0] - us[left])
        out[right] = out[inside][-1] - m * (us[right] - us[inside][-1])
    return out


def sample_bead(spec: WedgeSpec, maximum: float, rng, M: float = 8.0, nx: int = 129,
                ny: int = 17, eps_ladder=(0.12, 0.06), dt_rel: float = 2e-4,
                n_theta: int = 16, compute_area: bool = False) -> Bead:
    """One bead of a thin wedge, conditioned on its excursion maximum."""
    exc = sample_bead_excursion(spec.delta, maximum, rng, dt_rel=dt_rel)
    h1 = _h1_from_excursion(exc, spec.gamma, M, nx)
    raw = gff.sample_strip_gff(M, nx, ny, (min(nx - 1, 96), ny - 1), rng)
    h2 = gff.h2_remainder(raw)
    vals = h2.values + h1[:, None]
    fld = FieldSample(-M, M, 0.0, math.pi, vals, mode="anchored",
                      meta={"M": M, "bead_maximum": maximum, "gamma": spec.gamma})
    surf = QuantumSurface(fld, "strip", (-math.inf, math.inf), spec.gamma)
    margin = max(eps_ladder) + 2.0 * fld.hx
    lb = quantum_boundary_length(surf, (-M + margin, M - margin), eps_ladder,
                                 edge="bottom", n_theta=n_theta)
    lt = quantum_boundary_length(surf, (-M + margin, M - margin), eps_ladder,
                                 edge="top", n_theta=n_theta)
    area = float("nan")
    if compute_area:
        area = quantum_area(surf, (-M + margin, M - margin, margin, math.pi - margin),
                            eps_ladder, n_theta=n_theta)
    return Bead(excursion=exc, field=fld, maximum=maximum,
                boundary_length=lb + lt, length_bottom=lb, length_top=lt, area=area)


def sample_thin_wedge(spec: WedgeSpec, maxima_cutoff: float, budget: float, rng,
                      M: float = 8.0, nx: int = 129, ny: int = 17,
                      eps_ladder=(0.12, 0.06), dt_rel: float = 2e-4,
                      compute_area: bool = False) -> BeadedSurface:
    """Thin wedge above a maxima cutoff, within a local-time budget.

    Bead maxima arrive as a Poisson point process with intensity
    t^(delta-3) dt per unit local time (unit constant by convention); the
    expected bead count is budget * cutoff^(delta-2) / (2-delta).  Beads
    are ordered by arrival.  An empty draw returns a flagged empty surface.
    """
    if spec.flavor != "thin":
        raise ValueError(f"weight {spec.weight} is not thin for gamma {spec.gamma}")
    if maxima_cutoff <= 0:
        raise ValueError("maxima cutoff must be positive")
    delta = spec.delta
    mean_count = budget * maxima_cutoff ** (delta - 2.0) / (2.0 - delta)
    n = int(rng.poisson(mean_count))
    beads = []
    for _ in range(n):
        m = maxima_cutoff * rng.uniform() ** (-1.0 / (2.0 - delta))
        beads.append(sample_bead(spec, m, rng, M=M, nx=nx, ny=ny,
                                 eps_ladder=eps_ladder, dt_rel=dt_rel,
                                 compute_area=compute_area))
    return BeadedSurface(beads=beads, spec=spec, maxima_cutoff=maxima_cutoff,
                         meta={"budget": budget, "mean_count": mean_count,
                               "empty": n == 0})


def _ladder(eps_ladder) -> list:
    ladder = sorted(float(e) for e in eps_ladder)
    if not ladder or ladder[0] <= 0:
        raise ValueError("epsilon ladder must be positive")
    return ladder


def quantum_area(surface: QuantumSurface, region, eps_ladder, n_theta: int = 16,
                 full: bool = False):
    """Regularized quantum area of a rectangular region of the mesh.

    region = (x0, x1, y0, y1) must keep a margin of the largest ladder
    epsilon from the mesh boundary.  Returns the finest-epsilon value, or
    (value, per-epsilon dict) with ``full``.
    """
    ladder = _ladder(eps_ladder)
    x0, x1, y0, y1 = region
    f = surface.field
    gamma = surface.gamma
    eps_max = ladder[-1]
    if not (x0 - eps_max >= f.x0 and x1 + eps_max <= f.x1
            and y0 - eps_max >= f.y0 and y1 + eps_max <= f.y1):
        raise ValueError("region too close to the mesh edge for the epsilon ladder")
    xs, ys = f.xs, f.ys
    keep_x = (xs >= x0) & (xs <= x1)
    keep_y = (ys >= y0) & (ys <= y1)
    gx, gy = np.meshgrid(xs[keep_x], ys[keep_y], indexing="ij")
    cell = f.hx * f.hy
    out = {}
    for eps in ladder:
        h_eps = gff.arc_average_many(f, gx.ravel(), gy.ravel(), eps,
                                     arc="circle", n_theta=n_theta)
        out[eps] = float(np.exp(gamma * h_eps + (gamma * gamma / 2.0) * math.log(eps)).sum() * cell)
    finest = out[ladder[0]]
    return (finest, out) if full else finest


def quantum_boundary_length(surface: QuantumSurface, interval, eps_ladder,
                            edge: str = "bottom", n_theta: int = 16,
                            full: bool = False):
    """Regularized quantum length of a boundary interval [a, b).

    Nodes are selected half-open so disjoint intervals add exactly.  The
    ``edge`` picks the bottom (y = y0) or top (y = y1) mesh boundary; the
    average runs over the semicircle facing into the mesh.
    """
    ladder = _ladder(eps_ladder)
    a, b = interval
    f = surface.field
    gamma = surface.gamma
    eps_max = ladder[-1]
    if a - eps_max < f.x0 or b + eps_max > f.x1:
        raise ValueError("interval too close to the mesh edge for the epsilon ladder")
    xs = f.xs
    keep = (xs >= a) & (xs < b)
    px = xs[keep]
    out = {}
    for eps in ladder:
        if edge == "bottom":
            h_eps = gff.arc_average_many(f, px, np.full(px.size, f.y0), eps,
                                         arc="semicircle", n_theta=n_theta)
        elif edge == "top":
            h_eps = -0.0 + _top_semicircle_average(f, px, eps, n_theta)
        else:
            raise ValueError(f"unknown edge {edge!r}")
        out[eps] = float(np.exp(0.5 * gamma * h_eps + (gamma * gamma / 4.0) * math.log(eps)).sum() * f.hx)
    finest = out[ladder[0]]
    return (finest, out) if full else finest


def _top_semicircle_average(f: FieldSample, px: np.ndarray, eps: float,
                            n_theta: int) -> np.ndarray:
    theta = math.pi + (np.arange(n_theta) + 0.5) * (math.pi / n_theta)
    cx = px[..., None]
    cy = np.full(px.size, f.y1)[..., None]
    qx = cx + eps * np.cos(theta)
    qy = cy + eps * np.sin(theta)
    if not f.contains(qx, qy):
        raise ValueError("arc leaves the mesh")
    return gff.bilinear(f, qx, qy).mean(axis=-1)


def change_coordinates(surface: QuantumSurface, phi: ConformalMap, Q: float | None = None,
                       new_box=None, new_shape=None, new_domain: str | None = None
                       ) -> QuantumSurface:
    """Pull a surface back through phi: new domain -> old domain.

    The new field is h o phi + Q log |phi'| interpolated on the new mesh;
    marked points are carried through the inverse map.
    """
    if Q is None:
        Q = q_parameter(surface.gamma)
    f = surface.field
    if phi.kind == "identity" and new_box is None:
        return QuantumSurface(FieldSample(f.x0, f.x1, f.y0, f.y1, f.values.copy(),
                                          mode=f.mode, meta=dict(f.meta)),
                              surface.domain, surface.marked, surface.gamma,
                              dict(surface.meta))
    if new_box is None:
        raise ValueError("new_box is required for non-identity maps")
    x0, x1, y0, y1 = new_box
    nx, ny = new_shape if new_shape is not None else (f.nx, f.ny)
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    z_new = gx + 1j * gy
    z_old = phi.apply(z_new)
    if not f.contains(z_old.real, z_old.imag):
        raise ValueError("the mapped mesh leaves the source field's support")
    vals = gff.bilinear(f, z_old.real, z_old.imag) + Q * phi.log_abs_deriv(z_new)
    new_field = FieldSample(x0, x1, y0, y1, vals, mode="anchored",
                            meta={"mapped_by": phi.kind, **f.meta})
    marked = tuple(complex(phi.invert(m)) if np.isfinite(complex(m).real) and np.isfinite(complex(m).imag)
                   else m for m in surface.marked)
    return QuantumSurface(new_field, new_domain or surface.domain, marked,
                          surface.gamma, dict(surface.meta))


def wedge_to_half_plane(surface: QuantumSurface, box, shape) -> QuantumSurface:
    """Transport a strip-parameterized wedge onto a half-plane mesh.

    Applies the exponential coordinate change h(log w) + Q log|1/w|.  Mesh
    points whose log-coordinate leaves the strip truncation are filled by
    continuing the horizontal profile linearly with the wedge drift, so
    the field is defined on the whole box (the far continuation carries
    negligible quantum mass).
    """
    if surface.domain != "strip":
        raise ValueError("expected a strip-parameterized wedge")
    f = surface.field
    q = q_parameter(surface.gamma)
    drift = surface.meta.get("drift")
    x0, x1, y0, y1 = box
    nx, ny = shape
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    w = gx + 1j * np.maximum(gy, 1e-12)
    s = np.log(np.abs(w))
    ang = np.angle(w)
    s_cl = np.clip(s, f.x0, f.x1)
    vals = gff.bilinear(f, s_cl, np.clip(ang, f.y0, f.y1))
    if drift is not None:
        vals = vals + drift * (s - s_cl)
    vals = vals - q * s
    fld = FieldSample(x0, x1, y0, y1, vals, mode="anchored",
                      meta={"from": "strip-wedge", **surface.meta})
    return QuantumSurface(fld, "half-plane", (0.0, math.inf), surface.gamma,
                          dict(surface.meta))


def perturbed_measure(m: LocalMeasure, phi_values, gamma: float, d: float) -> LocalMeasure:
    """Reweight each atom by exp(gamma (2-d)/2 * phi at the atom)."""
    if not (0.0 < d < 2.0):
        raise ValueError(f"d must lie in (0,2), got {d}")
    phi = np.asarray(phi_values, float)
    if phi.shape != m.atoms_v.shape:
        raise ValueError("need one perturbation value per atom")
    if not np.all(np.isfinite(phi)):
        raise ValueError("perturbation values must be finite")
    w = m.weights * np.exp(0.5 * gamma * (2.0 - d) * phi)
    return LocalMeasure(m.atoms_v.copy(), w, m.lo, m.hi)
