"""Exponent algebra and the correlated stable boundary-length process.

The pair (L, R) of outer boundary lengths, run in the intrinsic bubble
clock, is a two-dimensional alpha-stable Levy process whose jumps always
come in matched pairs: L jumps up by x and R jumps down by y at the same
instant, with x + y the boundary length of the bubble being swallowed.
At rho = kappa - 4 the matched pair is an exact uniform split of a
power-law jump; for other admissible rho the split law is not pinned down
and the uniform split here is a flagged modeling choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .stats import hill_plateau

__all__ = [
    "admissible",
    "require_admissible",
    "ExponentSheet",
    "exponents",
    "kpz_consistency",
    "sample_jump_ppp",
    "split_jumps",
    "StablePath",
    "sample_lr_path",
    "estimate_stability_index",
    "LadderProcess",
    "ladder_height",
    "range_dimension_estimate",
]


def admissible(kappa: float, rho: float) -> bool:
    """Light-cone window: kappa in (0,4) and max(kappa/2-4, -2-kappa/2) < rho < -2."""
    return 0.0 < kappa < 4.0 and max(kappa / 2.0 - 4.0, -2.0 - kappa / 2.0) < rho < -2.0


def require_admissible(kappa: float, rho: float) -> None:
    if not admissible(kappa, rho):
        lo = max(kappa / 2.0 - 4.0, -2.0 - kappa / 2.0)
        raise ValueError(
            f"(kappa, rho) = ({kappa}, {rho}) outside the light-cone window "
            f"kappa in (0,4), rho in ({lo}, -2)")


@dataclass(frozen=True)
class ExponentSheet:
    """All exponents attached to one admissible (kappa, rho) pair."""

    kappa: float
    rho: float
    gamma: float            # sqrt(kappa)
    alpha_stable: float     # stability index of (L, R)
    delta_bead: float       # Bessel dimension encoding the cut-off bubbles
    beta_intensity: float   # exponent of the bubble boundary-length intensity t^beta
    dim_boundary: float     # Hausdorff dimension of curve-meets-positive-axis
    ladder_index: float     # stability index of the ladder height subordinator
    inverse_lt_index: float  # index of the inverse local time subordinator


def exponents(kappa: float, rho: float) -> ExponentSheet:
    require_admissible(kappa, rho)
    alpha = 1.0 - 2.0 * (rho + 2.0) / kappa
    return ExponentSheet(
        kappa=kappa,
        rho=rho,
        gamma=math.sqrt(kappa),
        alpha_stable=alpha,
        delta_bead=1.0 + 2.0 * (rho + 2.0) / kappa,
        beta_intensity=-2.0 + 2.0 * (rho + 2.0) / kappa,
        dim_boundary=-(2.0 + rho) * (kappa + 8.0 + 2.0 * rho) / (2.0 * kappa),
        ladder_index=alpha - 1.0,
        inverse_lt_index=1.0 - 1.0 / alpha,
    )


def kpz_consistency(kappa: float, rho: float) -> tuple[float, float, bool]:
    """Check the quadratic dimension relation against the closed form.

    The quantum-side dimension of the ladder-height range is
    d = alpha - 1 = -2(rho+2)/kappa; its Euclidean image under
    (1 + g/4) d - (g/4) d^2 with g = kappa must equal the closed-form
    boundary-intersection dimension.
    """
    sheet = exponents(kappa, rho)
    d_hat = sheet.ladder_index
    g = kappa / 4.0
    rhs = (1.0 + g) * d_hat - g * d_hat * d_hat
    lhs = sheet.dim_boundary
    return lhs, rhs, bool(abs(lhs - rhs) < 1e-12)


def sample_jump_ppp(kappa: float, c_fit: float, T: float, t_min: float, rng
                    ) -> np.ndarray:
    """Poisson point process on [0,T] x [t_min, inf) with intensity c * t^(-4/kappa).

    Returns an array of shape (n, 2) of (s_j, t_j) sorted by s_j.  Requires
    4/kappa > 1 so the tail mass is finite.
    """
    if not 0.0 < kappa < 4.0:
        raise ValueError(f"kappa must lie in (0,4), got {kappa}")
    if t_min <= 0:
        raise ValueError(f"t_min must be positive, got {t_min}")
    p = 4.0 / kappa
    if p <= 1.0:
        raise ValueError("intensity t^(-4/kappa) is not integrable at infinity")
    mass = c_fit * T * t_min ** (1.0 - p) / (p - 1.0)
    n = rng.poisson(mass)
    s = rng.uniform(0.0, T, size=n)
    t = t_min * rng.uniform(size=n) ** (-1.0 / (p - 1.0))
    order = np.argsort(s)
    return np.column_stack([s[order], t[order]])


def split_jumps(ppp: np.ndarray, rng) -> np.ndarray:
    """Uniform split of each jump: (s, t) -> (s, t*u, t*(1-u)), u ~ U[0,1]."""
    pts = np.atleast_2d(np.asarray(ppp, dtype=float))
    if pts.size == 0:
        return np.empty((0, 3))
    u = rng.uniform(size=pts.shape[0])
    x = pts[:, 1] * u
    y = pts[:, 1] - x     # keeps x + y = t exactly
    return np.column_stack([pts[:, 0], x, y])


@dataclass
class StablePath:
    """Matched-jump pure-jump path with compensating linear drift.

    ``jumps`` has columns (time, dL, dR): at each time L gains +dL and R
    gains -dR, dL, dR > 0.  ``drift`` = (drift_L, drift_R) is the rate that
    centers the truncated jump sums.  ``grid``/``L``/``R`` sample the path.
    """

    T: float
    jumps: np.ndarray
    drift: tuple
    grid: np.ndarray
    L: np.ndarray
    R: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        j = np.atleast_2d(self.jumps)
        if j.size and (np.any(j[:, 1] < 0) or np.any(j[:, 2] < 0)):
            raise ValueError("jump components must be nonnegative")

    @property
    def n_jumps(self) -> int:
        return 0 if self.jumps.size == 0 else self.jumps.shape[0]

    def jumps_to_csv(self, path) -> None:
        data = self.jumps if self.jumps.size else np.empty((0, 3))
        np.savetxt(path, data, delimiter=",", header="time,dL,dR", comments="", fmt="%.17g")

    def grid_to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.grid, self.L, self.R]),
                   delimiter=",", header="t,L,R", comments="", fmt="%.17g")


def sample_lr_path(kappa: float, rho: float, c_fit: float, T: float, t_min: float,
                   dt: float, rng) -> StablePath:
    """Correlated stable pair (L, R) from the matched-jump recipe.

    Jump magnitudes t follow the intensity c * t^beta dt with
    beta = -2 + 2(rho+2)/kappa, split uniformly into (dL, dR) = (tu, t(1-u)).
    Jumps below t_min are dropped and replaced by the exact linear drift that
    centers the kept sums; the residual fluctuation bias is O(t_min^(2-alpha)).
    """
    sheet = exponents(kappa, rho)
    alpha = sheet.alpha_stable
    if not (1.0 < alpha < 2.0):
        raise ValueError(f"stability index {alpha} outside (1,2)")
    if t_min <= 0 or dt <= 0 or T <= 0:
        raise ValueError("T, t_min, dt must be positive")
    p = -sheet.beta_intensity          # = 1 + alpha, tail of the magnitude density
    mass = c_fit * T * t_min ** (1.0 - p) / (p - 1.0)
    n = rng.poisson(mass)
    s = np.sort(rng.uniform(0.0, T, size=n))
    t = t_min * rng.uniform(size=n) ** (-1.0 / (p - 1.0))
    u = rng.uniform(size=n)
    d_l = t * u
    d_r = t - d_l
    jumps = np.column_stack([s, d_l, d_r])

    # mean magnitude of a kept jump, times the arrival rate, halved by the split
    mean_t_rate = c_fit * t_min ** (2.0 - p) / (p - 2.0)
    drift_l = -0.5 * mean_t_rate
    drift_r = +0.5 * mean_t_rate

    grid = np.arange(0.0, T + 0.5 * dt, dt)
    counts = np.searchsorted(s, grid, side="right")
    cum_l = np.concatenate([[0.0], np.cumsum(d_l)])
    cum_r = np.concatenate([[0.0], np.cumsum(d_r)])
    big_l = cum_l[counts] + drift_l * grid
    big_r = -cum_r[counts] + drift_r * grid
    return StablePath(T=T, jumps=jumps, drift=(drift_l, drift_r), grid=grid,
                      L=big_l, R=big_r,
                      meta={"kappa": kappa, "rho": rho, "c": c_fit,
                            "t_min": t_min, "alpha": alpha,
                            "uniform_split_modeled": bool(abs(rho - (kappa - 4.0)) > 1e-12)})


def estimate_stability_index(paths, full: bool = False):
    """Stability index from an ensemble of paths.

    Combines a Hill plateau estimate on pooled jump magnitudes with a
    scaling-collapse estimate from marginal quantile ratios; returns their
    average (and both, with agreement, when ``full``).
    """
    paths = list(paths)
    if len(paths) < 100:
        raise ValueError(f"need at least 100 paths, got {len(paths)}")
    sizes = np.concatenate([p.jumps[:, 1] + p.jumps[:, 2] for p in paths if p.n_jumps])
    if sizes.size < 200:
        raise ValueError("too few jumps to estimate a tail index")
    hill, hill_diag = hill_plateau(sizes)

    # scaling collapse: |L_T - L_{T/c}| quantiles vs |L_{T/c} - L_0| quantiles
    c = 8.0
    ratios = []
    for q in (0.6, 0.7, 0.8):
        full_span = np.array([p.L[-1] - p.L[0] for p in paths])
        k = max(1, int(round((len(paths[0].grid) - 1) / c)))
        part_span = np.array([p.L[k] - p.L[0] for p in paths])
        q_full = np.quantile(np.abs(full_span), q)
        q_part = np.quantile(np.abs(part_span), q)
        if q_part > 0 and q_full > q_part:
            ratios.append(math.log(c) / math.log(q_full / q_part))
    collapse = float(np.median(ratios)) if ratios else float("nan")
    est = float(np.nanmean([hill, collapse]))
    if not full:
        return est
    return est, {"hill": hill, "collapse": collapse,
                 "agreement": abs(hill - collapse), "hill_diag": hill_diag}


@dataclass
class LadderProcess:
    """Running-maximum records of -R along the grid."""

    record_times: np.ndarray
    record_values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.record_values) < 0):
            raise ValueError("record values must be nondecreasing")

    @property
    def n_records(self) -> int:
        return self.record_values.size


def ladder_height(path: StablePath) -> LadderProcess:
    """Record set of -R: the times and values of new running maxima.

    The closure of the record values realizes the ladder height range; the
    record-count growth tracks the inverse local time at the maximum.
    """
    neg_r = -path.R
    running = np.maximum.accumulate(neg_r)
    is_record = np.empty(neg_r.size, dtype=bool)
    is_record[0] = True
    is_record[1:] = neg_r[1:] > running[:-1]
    return LadderProcess(record_times=path.grid[is_record],
                         record_values=neg_r[is_record],
                         meta={"alpha": path.meta.get("alpha")})


def range_dimension_estimate(ladder: LadderProcess, full: bool = False):
    """Box-counting dimension of the closed record-value set."""
    vals = ladder.record_values
    if vals.size < 1000:
        raise ValueError(f"need at least 1000 records, got {vals.size}")
    span = vals[-1] - vals[0]
    if span <= 0:
        raise ValueError("degenerate record range")
    rel = (vals - vals[0]) / span
    k_max = int(math.log2(vals.size)) + 2
    scales = 2.0 ** -np.arange(2, k_max + 1)
    counts = np.array([np.unique(np.floor(rel / s)).size for s in scales])
    usable = (counts >= 4) & (counts <= 0.7 / scales)
    if usable.sum() < 3:
        raise ValueError("fewer than 3 usable dyadic scales for the record set")
    slope, intercept = np.polyfit(np.log2(1.0 / scales[usable]), np.log2(counts[usable]), 1)
    if not full:
        return float(slope)
    return float(slope), {"scales": scales[usable], "counts": counts[usable],
                          "intercept": float(intercept)}
