"""Forward and reverse Loewner flows driven by Bessel-built driving pairs.

A forward flow with one force point of weight rho carries the driving pair

    X = Bessel of dimension 1 + 2(rho+2)/kappa,
    V = (2/sqrt(kappa)) P.V. int 1/X,     W = V - sqrt(kappa) X,

where the principal value is realized through the restarted-process
rearrangement whenever the dimension is below one.  The reverse flow uses
dimension 1 + 2(rho_tilde-2)/kappa and flips the sign of the drift integral.

All flow evaluation composes per-step exact vertical-slit maps (the
discrete zipper).  That choice keeps every step conformal, picks the
correct branch by construction, and makes hull capacity exactly additive
across steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bessel

__all__ = [
    "DrivingFunction",
    "FlowResult",
    "LoewnerTrace",
    "forward_bessel_dimension",
    "reverse_bessel_dimension",
    "sample_forward_driving",
    "sample_reverse_driving",
    "sample_multi_driving",
    "forward_map",
    "reverse_map",
    "reverse_flow_grid",
    "trace_curve",
    "capacity_from_points",
    "detect_separation",
]


def _msqrt(w: np.ndarray) -> np.ndarray:
    """Square root branch landing in the closed upper half-plane."""
    s = np.sqrt(w if np.iscomplexobj(w) else w.astype(complex))
    return np.where(s.imag < 0.0, -s, s)


@dataclass
class DrivingFunction:
    """Driving process W with force-point images V on a uniform grid.

    For a single force point, V - W = sqrt(kappa) X pointwise with X the
    nonnegative gap process.  Multi-force-point drivings store V as a
    (n_points, n_grid) array and leave X empty.
    """

    times: np.ndarray
    W: np.ndarray
    V: np.ndarray
    X: np.ndarray
    kappa: float
    rho: tuple
    direction: str            # "forward" | "reverse"
    delta: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in ("forward", "reverse"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.X.size and self.V.ndim == 1:
            if np.any(self.V - self.W < -1e-9):
                raise ValueError("single-force-point gap V - W must stay nonnegative")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    def to_csv(self, path) -> None:
        v = self.V if self.V.ndim > 1 else (self.V[None, :] if self.V.size else np.empty((0, self.times.size)))
        cols = [self.times, self.W] + [v[i] for i in range(v.shape[0])]
        header = ",".join(["t", "W"] + [f"V{i}" for i in range(v.shape[0])])
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")


@dataclass
class FlowResult:
    z_image: complex
    log_deriv: float          # log |f'| accumulated along reverse flows, 0 forward
    alive: bool
    absorb_time: float = math.inf
    log_deriv_complex: complex = 0j


@dataclass
class LoewnerTrace:
    points: np.ndarray        # complex tips eta(t_k)
    capacities: np.ndarray    # half-plane capacity times t_k
    tip_index: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.points.size and abs(self.points[0]) > 1e-6:
            raise ValueError("trace must start at the origin")

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.capacities, self.points.real, self.points.imag]),
                   delimiter=",", header="t,re,im", comments="", fmt="%.17g")


def forward_bessel_dimension(kappa: float, rho: float) -> float:
    return 1.0 + 2.0 * (rho + 2.0) / kappa


def reverse_bessel_dimension(kappa: float, rho_tilde: float) -> float:
    return 1.0 + 2.0 * (rho_tilde - 2.0) / kappa


def _driving_from_gap(kappa: float, rho, delta: float, direction: str, T: float,
                      dt: float, rng, eps: float | None,
                      dw: np.ndarray | None = None) -> DrivingFunction:
    """Shared construction: gap process, drift integral, then W = V - sqrt(k) X."""
    sign = 1.0 if direction == "forward" else -1.0
    sk = math.sqrt(kappa)
    if delta < 1.0:
        eps = math.sqrt(dt) if eps is None else eps
        xpath, jumps = bessel.simulate_eps_bes(delta, 0.0, eps, T, dt, rng, dw=dw)
        j = bessel.jump_process(xpath, jumps)
        pv = bessel.pv_integral(xpath, j, delta, 0.0)
        v = sign * (2.0 / sk) * pv.values
        meta = {"eps": eps, "n_jumps": int(jumps.size), "jump_times": jumps,
                "jump_sizes": xpath.meta["jump_sizes"],
                "brownian": xpath.meta["brownian"]}
    else:
        xpath = bessel.simulate_bes(delta, 0.0, T, dt, rng, dw=dw)
        integral = bessel.direct_inverse_integral(xpath, floor=math.sqrt(dt) * 1e-3)
        v = sign * (2.0 / sk) * integral.values
        meta = {}
    x = xpath.values
    w = v - sk * x
    rho_t = rho if isinstance(rho, tuple) else (float(rho),)
    return DrivingFunction(times=xpath.times, W=w, V=v, X=x, kappa=kappa,
                           rho=rho_t, direction=direction, delta=delta, meta=meta)


def sample_forward_driving(kappa: float, rho: float, T: float, dt: float, rng,
                           eps: float | None = None,
                           dw: np.ndarray | None = None) -> DrivingFunction:
    """Forward driving pair for one force point of weight rho at 0+."""
    if not (0.0 < kappa < 4.0):
        raise ValueError(f"kappa must lie in (0,4), got {kappa}")
    if rho <= -2.0 - kappa / 2.0:
        raise ValueError(f"rho must exceed -2 - kappa/2 = {-2 - kappa / 2}, got {rho}")
    delta = forward_bessel_dimension(kappa, rho)
    return _driving_from_gap(kappa, rho, delta, "forward", T, dt, rng, eps, dw=dw)


def sample_reverse_driving(kappa: float, rho_tilde: float, T: float, dt: float, rng,
                           eps: float | None = None,
                           dw: np.ndarray | None = None) -> DrivingFunction:
    """Reverse driving pair; requires rho_tilde > 2 - kappa/2."""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if rho_tilde <= 2.0 - kappa / 2.0:
        raise ValueError(f"rho_tilde must exceed 2 - kappa/2 = {2 - kappa / 2}, got {rho_tilde}")
    delta = reverse_bessel_dimension(kappa, rho_tilde)
    return _driving_from_gap(kappa, rho_tilde, delta, "reverse", T, dt, rng, eps, dw=dw)


def sample_multi_driving(kappa: float, rhos, xs, T: float, dt: float, rng,
                         eps_gap: float | None = None) -> DrivingFunction:
    """Euler solution of the many-force-point driving SDE.

    Force points sit at distinct xs; 0.0 is read as 0+ and -0.0 as 0-.
    Integration halts with a flagged stop the first time the weights of the
    force points currently colliding with W sum to -2 or below (the
    continuation threshold).  Drift denominators are regularized at
    eps_gap (reflected Euler; documented bias) and force points never
    cross the driving.
    """
    rhos = tuple(float(r) for r in rhos)
    xs_in = tuple(xs)
    if len(rhos) != len(xs_in):
        raise ValueError("rhos and xs must have equal length")
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    n = int(round(T / dt))
    if n < 1:
        raise ValueError("need at least one step")
    if eps_gap is None:
        eps_gap = 0.5 * math.sqrt(kappa * dt)
    gap_thr = 3.0 * math.sqrt(kappa * dt)
    sk_dt = math.sqrt(kappa * dt)
    m = len(rhos)
    rho_arr = np.asarray(rhos)
    sides = np.array([math.copysign(1.0, x) for x in xs_in])
    w = np.zeros(n + 1)
    v = np.zeros((m, n + 1))
    cur_w = 0.0
    cur_v = np.abs(np.array(xs_in, dtype=float)) * sides
    v[:, 0] = cur_v
    stop_index = None
    if m:
        colliding = np.abs(cur_v - cur_w) < gap_thr
        if colliding.any() and rho_arr[colliding].sum() <= -2.0:
            stop_index = 0
    k = 0
    while stop_index is None and k < n:
        gap = cur_v - cur_w
        safe = np.where(gap == 0.0, sides * eps_gap, gap)
        reg = np.where(np.abs(safe) < eps_gap, np.copysign(eps_gap, safe), safe)
        drift = -float(np.sum(rho_arr / reg)) * dt if m else 0.0
        new_w = cur_w + sk_dt * rng.standard_normal() + drift
        new_v = cur_v + 2.0 * dt / reg
        rel = new_v - new_w
        crossed = rel * sides < 0.0
        new_v[crossed] = new_w
        cur_w, cur_v = new_w, new_v
        k += 1
        w[k] = cur_w
        v[:, k] = cur_v
        if m:
            colliding = np.abs(cur_v - cur_w) < gap_thr
            if colliding.any() and rho_arr[colliding].sum() <= -2.0:
                stop_index = k
    stopped = stop_index is not None
    last = stop_index if stopped else n
    times = dt * np.arange(last + 1)
    return DrivingFunction(times=times, W=w[: last + 1], V=v[:, : last + 1],
                           X=np.empty(0), kappa=kappa, rho=rhos, direction="forward",
                           delta=float("nan"),
                           meta={"xs": xs_in, "stopped": stopped,
                                 "stop_time": last * dt if stopped else None,
                                 "eps_gap": eps_gap, "gap_threshold": gap_thr})


def forward_map(driving: DrivingFunction, z, t: float) -> FlowResult:
    """Image g_t(z) under the forward flow, by slit-map composition.

    A point whose centered image comes within the swallow threshold of the
    driving is reported absorbed, not raised.
    """
    if driving.direction != "forward":
        raise ValueError("forward_map needs a forward driving")
    dt = driving.dt
    k_end = int(round(t / dt))
    if k_end > driving.n_steps:
        raise ValueError(f"t={t} beyond driving horizon {driving.times[-1]}")
    swallow = 2.0 * math.sqrt(dt)
    dw = np.diff(driving.W[: k_end + 1])
    u = complex(z) - driving.W[0]
    four_dt = 4.0 * dt
    for k in range(k_end):
        if abs(u) < swallow:
            return FlowResult(z_image=u + driving.W[k], log_deriv=0.0, alive=False,
                              absorb_time=k * dt)
        s = complex(np.emath.sqrt(u * u + four_dt))
        if s.imag < 0:
            s = -s
        u = s - dw[k]
    return FlowResult(z_image=u + driving.W[k_end], log_deriv=0.0, alive=True)


def reverse_map(driving: DrivingFunction, z, t: float) -> FlowResult:
    """Centered reverse image f_t(z) with the accumulated log-derivative.

    Interior points are never absorbed.  z = 0.0 is read as the tracked
    force point 0+, whose centered image is sqrt(kappa) X_t exactly on the
    grid, by construction of the driving.
    """
    if driving.direction != "reverse":
        raise ValueError("reverse_map needs a reverse driving")
    dt = driving.dt
    k_end = int(round(t / dt))
    if k_end > driving.n_steps:
        raise ValueError(f"t={t} beyond driving horizon {driving.times[-1]}")
    if isinstance(z, (int, float)) and z == 0.0:
        if driving.X.size == 0:
            raise ValueError("driving does not track a single force point")
        return FlowResult(z_image=complex(math.sqrt(driving.kappa) * driving.X[k_end]),
                          log_deriv=0.0, alive=True)
    if complex(z).imag <= 0:
        raise ValueError("reverse_map needs Im z > 0 (or exactly 0.0 for the force point)")
    dw = np.diff(driving.W[: k_end + 1])
    u = complex(z) - driving.W[0]
    log_d = 0j
    four_dt = 4.0 * dt
    for k in range(k_end):
        s = complex(np.emath.sqrt(u * u - four_dt))
        if s.imag < 0:
            s = -s
        log_d += np.log(u / s)
        u = s - dw[k]
    return FlowResult(z_image=u, log_deriv=float(log_d.real), alive=True,
                      log_deriv_complex=complex(log_d))


def reverse_map_final(driving: DrivingFunction, zs, k_end: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized centered reverse images f_t(z) and complex log f_t'(z) at one time."""
    if driving.direction != "reverse":
        raise ValueError("need a reverse driving")
    dt = driving.dt
    dw = np.diff(driving.W[: k_end + 1])
    u = np.asarray(zs, dtype=complex).ravel() - driving.W[0]
    acc = np.zeros(u.size, dtype=complex)
    four_dt = 4.0 * dt
    for k in range(k_end):
        s = _msqrt(u * u - four_dt)
        acc += np.log(u / s)
        u = s - dw[k]
    return u, acc


def reverse_flow_grid(driving: DrivingFunction, zs, k_end: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized centered reverse flow of many points over k_end steps.

    Returns (n_points, k_end+1) arrays: trajectories f_t(z) and the complex
    log-derivative log f_t'(z) along the way.  The coupling suites need the
    whole trajectory at every quadrature node, which is what this fills.
    """
    if driving.direction != "reverse":
        raise ValueError("need a reverse driving")
    dt = driving.dt
    dw = np.diff(driving.W[: k_end + 1])
    u = np.asarray(zs, dtype=complex).ravel() - driving.W[0]
    out = np.empty((u.size, k_end + 1), dtype=complex)
    logd = np.zeros((u.size, k_end + 1), dtype=complex)
    out[:, 0] = u
    acc = np.zeros(u.size, dtype=complex)
    four_dt = 4.0 * dt
    for k in range(k_end):
        s = _msqrt(u * u - four_dt)
        acc = acc + np.log(u / s)
        u = s - dw[k]
        out[:, k + 1] = u
        logd[:, k + 1] = acc
    return out, logd


def trace_curve(driving: DrivingFunction, dt: float | None = None,
                h_trace: float | None = None, stride: int = 1) -> LoewnerTrace:
    """Curve tips by composing inverse slit steps (the zipper method).

    eta(t_k) is approximated by the preimage of i*h_trace under the centered
    flow at time t_k; ``stride`` thins the set of output times.  Cost is
    O(n^2 / stride), vectorized over tips.
    """
    if driving.direction != "forward":
        raise ValueError("trace_curve needs a forward driving")
    dt = driving.dt if dt is None else dt
    if abs(dt - driving.dt) > 1e-12 * max(1.0, driving.dt):
        raise ValueError("trace grid must match the driving grid")
    h = math.sqrt(dt) if h_trace is None else h_trace
    n = driving.n_steps
    ks = np.arange(0, n + 1, stride)
    if ks[-1] != n:
        ks = np.append(ks, n)
    dw = np.diff(driving.W)
    tips = np.full(ks.size, 1j * h, dtype=complex)
    four_dt = 4.0 * dt
    # tips[m] must absorb inverse steps j = ks[m]-1 .. 0; sweep j downward and
    # apply each step to every tip whose prefix includes it
    start_of = np.searchsorted(ks, np.arange(1, n + 1), side="left")
    for j in range(n - 1, -1, -1):
        m0 = start_of[j]
        seg = tips[m0:] + dw[j]
        seg = seg * seg - four_dt
        s = np.sqrt(seg)
        np.copyto(s, -s, where=s.imag < 0.0)
        tips[m0:] = s
    tips = tips + driving.W[0]
    tips[0] = 0.0
    pts = np.where(tips.imag < 0.0, tips.real + 0j, tips)
    return LoewnerTrace(points=pts, capacities=driving.times[ks], tip_index=pts.size - 1,
                        meta={"h_trace": h, "stride": stride})


def tips_at(driving: DrivingFunction, indices) -> np.ndarray:
    """Curve positions eta(t_k) for an arbitrary set of grid indices.

    Same inverse-step sweep as :func:`trace_curve`, restricted to the
    requested capacity times; cost is the sum of the requested indices.
    """
    if driving.direction != "forward":
        raise ValueError("tips_at needs a forward driving")
    ks = np.asarray(sorted(set(int(k) for k in indices)), dtype=int)
    if ks.size == 0:
        return np.empty(0, dtype=complex)
    if ks[-1] > driving.n_steps:
        raise ValueError("index beyond driving horizon")
    dt = driving.dt
    h = math.sqrt(dt)
    dw = np.diff(driving.W)
    tips = np.full(ks.size, 1j * h, dtype=complex)
    four_dt = 4.0 * dt
    start_of = np.searchsorted(ks, np.arange(1, ks[-1] + 1), side="left")
    for j in range(ks[-1] - 1, -1, -1):
        m0 = start_of[j]
        seg = tips[m0:] + dw[j]
        seg = seg * seg - four_dt
        s = np.sqrt(seg)
        np.copyto(s, -s, where=s.imag < 0.0)
        tips[m0:] = s
    tips = tips + driving.W[0]
    return tips


def capacity_from_points(points: np.ndarray) -> float:
    """Half-plane capacity of the hull spanned by a curve, from its points alone.

    Welds the points down one at a time with vertical-slit maps; in the
    normalization g(z) = z + hcap/z + ..., each weld of height v adds
    exactly v^2/2.  This is the driving-free oracle for the traced hull's
    capacity, to be compared with 2t.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.size and pts[0] == 0:
        pts = pts[1:]
    rest = pts.copy()
    cap = 0.0
    for j in range(rest.size):
        zj = rest[j]
        v = zj.imag
        if v <= 0:
            continue
        cap += v * v / 2.0
        if j + 1 < rest.size:
            tail = rest[j + 1:] - zj.real
            s = np.sqrt(tail * tail + v * v)
            np.copyto(s, -s, where=s.imag < 0.0)
            rest[j + 1:] = s + zj.real
    return cap


def detect_separation(trace, driving: DrivingFunction, x: float,
                      margin_mult: float = 3.0) -> dict:
    """First time the hull disconnects x > 0, and the prior force-point collision.

    The curve swallows x at a frontier touchdown beyond it, which reads off
    the driving pair directly: x is separated at the first gap collision
    (the gap process inside its zero threshold) that occurs while the
    centered image of x sits within one step scale of the driving.  The
    image flow continues on the negative branch once the driving has run
    past the point, so later touchdowns still register.  S_x is the last
    prior collision.  Conformal collapse rates near pinches are below any
    fixed grid's resolution, so this detector necessarily lags the true
    separation time by up to one excursion; missing separation within the
    horizon is flagged in the result, not raised.
    """
    if x <= 0:
        raise ValueError(f"x must be positive, got {x}")
    if driving.direction != "forward":
        raise ValueError("need a forward driving")
    if driving.X.size == 0:
        raise ValueError("separation detection needs the single-force-point gap")
    dt = driving.dt
    thr = bessel.zero_threshold(dt)
    margin = margin_mult * math.sqrt(dt)
    dw = np.diff(driving.W)
    u = x - driving.W[0]
    four_dt = 4.0 * dt
    first_below = None
    for k in range(dw.size):
        if u <= margin:
            first_below = k
            break
        u = math.sqrt(u * u + four_dt) - dw[k]
    if first_below is None:
        return {"separated": False, "T_x": math.inf, "S_x": math.inf,
                "horizon": float(driving.times[-1])}
    colls = np.nonzero(driving.X < thr)[0]
    after = colls[colls >= first_below]
    if after.size == 0:
        return {"separated": False, "T_x": math.inf, "S_x": math.inf,
                "horizon": float(driving.times[-1]),
                "shadowed_at": first_below * dt}
    t_idx = int(after[0])
    prior = colls[colls < first_below]
    s_idx = int(prior[-1]) if prior.size else 0
    return {"separated": True, "T_x": t_idx * dt, "S_x": s_idx * dt,
            "T_index": int(t_idx), "S_index": int(s_idx)}


class SamplePathShim:
    """Duck-typed minimal path wrapper for excursion decomposition."""

    def __init__(self, values, dt):
        self.values = np.asarray(values)
        self.dt = dt
