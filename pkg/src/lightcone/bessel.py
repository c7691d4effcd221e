"""Squared Bessel, Bessel, and approximate Bessel simulation.

The squared Bessel process of dimension delta solves

    dZ = delta dt + 2 sqrt(Z) dB,

and the Bessel process is X = sqrt(Z).  For delta in (0,1) the drift form
dX = (delta-1)/(2X) dt + dB only holds in a principal-value sense because
the integral of 1/X diverges at the zeros.  The approximate process used
here restarts at ``eps`` whenever it hits zero, which turns the principal
value into the explicit rearrangement implemented by :func:`pv_integral`.

Two schemes are available.  ``euler`` is full-truncation Euler on the
squared process: nonnegative by construction, never divides by X, and
exposes the driving Brownian increments so coupled constructions (driving
functions, restarted processes) share one noise source.  ``exact`` steps
with the noncentral chi-square transition law; it has no discretization
bias in the grid marginals and is the right tool for distributional tests
and zero-set geometry, but it hides the Brownian driver.
"""

from __future__ import annotations

import math

import numpy as np

from .paths import Excursion, ExcursionSet, LocalTimeProfile, SamplePath

__all__ = [
    "zero_threshold",
    "simulate_besq",
    "simulate_bes",
    "simulate_eps_bes",
    "besq_ensemble",
    "bes_ensemble",
    "besq_terminal",
    "bes_terminal",
    "eps_bes_ensemble",
    "coupled_eps_ladder",
    "jump_process",
    "pv_integral",
    "direct_inverse_integral",
    "decompose_excursions",
    "local_time",
    "zero_set_dimension",
]


def zero_threshold(dt: float) -> float:
    """Default zero-detection level: one-step Brownian fluctuation scale."""
    return 3.0 * math.sqrt(dt)


def _check_grid(T: float, dt: float) -> int:
    if not (dt > 0 and T > 0):
        raise ValueError(f"need positive T and dt, got T={T}, dt={dt}")
    if not dt < T:
        raise ValueError(f"need dt < T, got dt={dt}, T={T}")
    return int(round(T / dt))


def simulate_besq(delta: float, z0: float, T: float, dt: float, rng,
                  dw: np.ndarray | None = None, scheme: str = "euler") -> SamplePath:
    """One squared Bessel path on the grid.

    ``dw`` may supply the Brownian increments (length T/dt, variance dt per
    step) to couple against another scheme; it forces the euler scheme.
    """
    n = _check_grid(T, dt)
    if z0 < 0:
        raise ValueError(f"z0 must be nonnegative, got {z0}")
    if scheme == "exact" and dw is None:
        if delta == 0.0 and z0 == 0.0:
            values = np.zeros(n + 1)
        else:
            values = _besq_exact(delta, z0, n, dt, rng, 1)[:, 0]
    else:
        if dw is None:
            dw = rng.standard_normal(n) * math.sqrt(dt)
        drift = delta * dt
        values = np.empty(n + 1)
        values[0] = cur = float(z0)
        for k in range(n):
            pos = cur if cur > 0.0 else 0.0
            cur = cur + drift + 2.0 * math.sqrt(pos) * dw[k]
            if cur < 0.0:
                cur = 0.0
            values[k + 1] = cur
    return SamplePath(t0=0.0, dt=dt, values=values,
                      meta={"delta": delta, "z0": z0, "kind": "besq", "scheme": scheme})


def simulate_bes(delta: float, x0: float, T: float, dt: float, rng,
                 dw: np.ndarray | None = None, scheme: str = "euler") -> SamplePath:
    """Bessel path of dimension delta > 0, as the square root of a BESQ path."""
    if delta <= 0:
        raise ValueError(f"Bessel dimension must be positive, got {delta}")
    if x0 < 0:
        raise ValueError(f"x0 must be nonnegative, got {x0}")
    z = simulate_besq(delta, x0 * x0, T, dt, rng, dw=dw, scheme=scheme)
    return SamplePath(t0=0.0, dt=dt, values=np.sqrt(z.values),
                      meta={"delta": delta, "x0": x0, "kind": "bes", "scheme": scheme})


def _besq_exact(delta: float, z0: float, n: int, dt: float, rng, width: int) -> np.ndarray:
    """Time-major (n+1, width) array of exact-transition BESQ paths."""
    if delta <= 0:
        raise ValueError(f"exact transitions need delta > 0, got {delta}")
    out = np.empty((n + 1, width))
    out[0] = z0
    cur = np.full(width, float(z0))
    for k in range(n):
        cur = dt * rng.noncentral_chisquare(delta, cur / dt)
        out[k + 1] = cur
    return out


def besq_ensemble(delta: float, z0: float, T: float, dt: float, rng, n_paths: int,
                  dw: np.ndarray | None = None, scheme: str = "euler") -> np.ndarray:
    """Array (n_paths, n_steps+1) of BESQ paths stepped in lockstep.

    Brownian increments are drawn per step unless ``dw`` (n_paths, n_steps)
    is given, so memory stays O(n_paths * n_steps) for the output only.
    """
    n = _check_grid(T, dt)
    if scheme == "exact" and dw is None:
        return np.ascontiguousarray(_besq_exact(delta, z0, n, dt, rng, n_paths).T)
    out = np.empty((n + 1, n_paths))
    out[0] = z0
    cur = np.full(n_paths, float(z0))
    drift = delta * dt
    sq = math.sqrt(dt)
    for k in range(n):
        step = rng.standard_normal(n_paths) * sq if dw is None else dw[:, k]
        cur = cur + drift + 2.0 * np.sqrt(np.maximum(cur, 0.0)) * step
        np.maximum(cur, 0.0, out=cur)
        out[k + 1] = cur
    return np.ascontiguousarray(out.T)


def bes_ensemble(delta: float, x0: float, T: float, dt: float, rng, n_paths: int,
                 dw: np.ndarray | None = None, scheme: str = "euler") -> np.ndarray:
    if delta <= 0:
        raise ValueError(f"Bessel dimension must be positive, got {delta}")
    return np.sqrt(besq_ensemble(delta, x0 * x0, T, dt, rng, n_paths, dw=dw, scheme=scheme))


def besq_terminal(delta: float, z0: float, T: float, rng, size: int) -> np.ndarray:
    """Exact draw of Z_T: the transition law is a scaled noncentral chi-square."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta == 0.0:
        if z0 == 0.0:
            return np.zeros(size)
        raise ValueError("delta = 0 terminal law only implemented at the absorbing start")
    return T * rng.noncentral_chisquare(delta, z0 / T, size=size)


def bes_terminal(delta: float, x0: float, T: float, rng, size: int) -> np.ndarray:
    return np.sqrt(besq_terminal(delta, x0 * x0, T, rng, size))


def simulate_eps_bes(delta: float, x0: float, eps: float, T: float, dt: float, rng,
                     dw: np.ndarray | None = None) -> tuple[SamplePath, np.ndarray]:
    """Approximate Bessel process that restarts at ``eps`` on each zero hit.

    Between hits the path follows dX = (delta-1)/(2X) dt + dB; a hit is a
    step that lands at or below zero.  Returns (path, jump times).  The
    driving Brownian path is kept in ``meta["brownian"]``, and
    ``meta["jump_record"]`` accumulates the scheme's actual restart
    displacements: a hitting step overshoots below zero before restarting
    at eps, so the displacement is eps plus the overshoot.  Booking the
    overshoot keeps the principal-value rearrangement an exact identity of
    the scheme; the eps-times-count process of the continuum definition
    remains available through :func:`jump_process`.  Starting at x0 = 0
    counts as an immediate restart of size eps.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"approximate Bessel defined for delta in (0,1), got {delta}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if x0 < 0:
        raise ValueError(f"x0 must be nonnegative, got {x0}")
    n = _check_grid(T, dt)
    half = 0.5 * (delta - 1.0)
    x = np.empty(n + 1)
    brownian = np.empty(n + 1)
    jump_record = np.zeros(n + 1)
    jumps = []
    jump_sizes = []
    cur = float(x0)
    acc = 0.0
    if cur <= 0.0:
        cur = eps
        acc = eps
        jumps.append(0.0)
        jump_sizes.append(eps)
    x[0] = cur
    brownian[0] = 0.0
    jump_record[0] = acc
    b = 0.0
    # near-zero steps are split into substeps so the restart overshoot,
    # which systematically inflates the drift compensation, stays well
    # below eps; a supplied dw forces the plain single-step scheme so
    # ladders can share one driver
    n_sub = 1 if dw is not None else 16
    sub_threshold = 3.0 * eps
    sq_sub = math.sqrt(dt / n_sub)
    for k in range(n):
        if dw is not None:
            step = dw[k]
            cur = cur + half * dt / cur + step
            b += step
            if cur <= 0.0:
                size = eps - cur
                acc += size
                cur = eps
                jumps.append((k + 1) * dt)
                jump_sizes.append(size)
        elif cur > sub_threshold:
            step = rng.standard_normal() * math.sqrt(dt)
            cur = cur + half * dt / cur + step
            b += step
            if cur <= 0.0:
                size = eps - cur
                acc += size
                cur = eps
                jumps.append((k + 1) * dt)
                jump_sizes.append(size)
        else:
            jumped = False
            for _ in range(n_sub):
                step = rng.standard_normal() * sq_sub
                cur = cur + half * (dt / n_sub) / cur + step
                b += step
                if cur <= 0.0:
                    size = eps - cur
                    acc += size
                    cur = eps
                    jumped = True
            if jumped:
                jumps.append((k + 1) * dt)
                jump_sizes.append(acc - jump_record[k])
        x[k + 1] = cur
        brownian[k + 1] = b
        jump_record[k + 1] = acc
    path = SamplePath(t0=0.0, dt=dt, values=x,
                      meta={"delta": delta, "x0": x0, "eps": eps, "kind": "eps-bes",
                            "brownian": brownian, "jump_record": jump_record,
                            "jump_sizes": np.asarray(jump_sizes)})
    return path, np.asarray(jumps)


def eps_bes_ensemble(delta: float, x0: float, eps: float, T: float, dt: float, rng,
                     n_paths: int, dw: np.ndarray | None = None
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Lockstep ensemble of restarted Bessel paths.

    Returns (values, jump_counts), both (n_paths, n+1); jump_counts[i, k] is
    the number of restarts of path i up to and including grid index k.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"approximate Bessel defined for delta in (0,1), got {delta}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = _check_grid(T, dt)
    half_drift = 0.5 * (delta - 1.0) * dt
    sq = math.sqrt(dt)
    x = np.empty((n + 1, n_paths))
    counts = np.empty((n + 1, n_paths))
    cur = np.full(n_paths, float(x0))
    hit = cur <= 0.0
    cur[hit] = eps
    running = hit.astype(float)
    x[0] = cur
    counts[0] = running
    for k in range(n):
        step = rng.standard_normal(n_paths) * sq if dw is None else dw[:, k]
        cur = cur + half_drift / cur + step
        hit = cur <= 0.0
        cur[hit] = eps
        running = running + hit
        x[k + 1] = cur
        counts[k + 1] = running
    return np.ascontiguousarray(x.T), np.ascontiguousarray(counts.T)


def coupled_eps_ladder(delta: float, x0: float, eps_ladder, T: float, dt: float,
                       rng, n_paths: int) -> dict:
    """Restarted processes at every rung, driven by one Brownian motion.

    Evolves a full-truncation Bessel path and one eps-restarted path per
    ladder value on shared increments, accumulating the running sup-distance
    and the squared-jump total without storing trajectories.  Returns, per
    rung, arrays over the ensemble of sup |X_eps - X| and J^(eps^2)_T.
    """
    ladder = [float(e) for e in eps_ladder]
    if any(e <= 0 for e in ladder):
        raise ValueError("ladder values must be positive")
    n = _check_grid(T, dt)
    sq = math.sqrt(dt)
    half_drift = 0.5 * (delta - 1.0) * dt
    drift_q = delta * dt
    z = np.full(n_paths, float(x0) ** 2)
    xs = [np.full(n_paths, float(x0) if x0 > 0 else e) for e in ladder]
    jump_counts = [np.full(n_paths, 0.0 if x0 > 0 else 1.0) for _ in ladder]
    sup_gap = [np.zeros(n_paths) for _ in ladder]
    for k in range(n):
        dwk = rng.standard_normal(n_paths) * sq
        z = z + drift_q + 2.0 * np.sqrt(np.maximum(z, 0.0)) * dwk
        np.maximum(z, 0.0, out=z)
        ref = np.sqrt(z)
        for i, e in enumerate(ladder):
            cur = xs[i] + half_drift / xs[i] + dwk
            hit = cur <= 0.0
            cur[hit] = e
            jump_counts[i] += hit
            np.maximum(sup_gap[i], np.abs(cur - ref), out=sup_gap[i])
            xs[i] = cur
    return {
        "eps": ladder,
        "sup_gap": [g.copy() for g in sup_gap],
        "j_eps2": [jump_counts[i] * ladder[i] ** 2 for i in range(len(ladder))],
    }


def jump_process(eps_path: SamplePath, jump_times: np.ndarray) -> SamplePath:
    """J_t = eps * #{jumps <= t} on the grid of ``eps_path``."""
    eps = eps_path.meta["eps"]
    counts = np.searchsorted(np.sort(np.asarray(jump_times)),
                             eps_path.times + 0.5 * eps_path.dt, side="right")
    return SamplePath(t0=eps_path.t0, dt=eps_path.dt, values=eps * counts,
                      meta={"eps": eps, "kind": "jumps"})


def pv_integral(eps_path: SamplePath, jump_count_path, delta: float, x0: float) -> SamplePath:
    """Principal value of the integral of 1/X along an approximate Bessel path.

    Rearranging the restarted SDE gives

        P.V. int_0^t ds/X_s  =  (2/(delta-1)) (X^eps_t - x0 - B_t),

    finite as eps -> 0: the raw integral and the jump total both diverge,
    and leaving the jumps inside the rearrangement is exactly what cancels
    the divergence.  (Subtracting the jump process as well would return the
    raw integral of 1/X^eps, which blows up.)  ``jump_count_path`` is kept
    in the signature for shape compatibility and diagnostics; the identity
    above does not consume it.  Direct singular quadrature is deliberately
    not offered for delta < 1.
    """
    if delta == 1.0:
        raise ValueError("delta = 1 has zero drift; the rearrangement divides by delta-1")
    if "brownian" not in eps_path.meta:
        raise ValueError("eps_path must come from simulate_eps_bes (missing Brownian record)")
    b = eps_path.meta["brownian"]
    vals = (2.0 / (delta - 1.0)) * (eps_path.values - x0 - b)
    return SamplePath(t0=eps_path.t0, dt=eps_path.dt, values=vals,
                      meta={"delta": delta, "kind": "pv-integral"})


def direct_inverse_integral(path: SamplePath, floor: float = 1e-12) -> SamplePath:
    """Left-endpoint quadrature of int 1/X ds, for paths with delta >= 1.

    The floor only guards isolated grid zeros; paths that spend real time
    near zero need :func:`pv_integral` instead.
    """
    x = np.maximum(path.values[:-1], floor)
    vals = np.empty(path.values.size)
    vals[0] = 0.0
    np.cumsum(path.dt / x, out=vals[1:])
    return SamplePath(t0=path.t0, dt=path.dt, values=vals, meta={"kind": "inv-integral"})


def decompose_excursions(path: SamplePath, threshold: float) -> ExcursionSet:
    """Maximal intervals on which the path stays at or above ``threshold``.

    Values below the threshold count as zeros of the ideal path.  A strictly
    positive path yields a single excursion covering the whole grid.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    above = path.values >= threshold
    if not above.any():
        return ExcursionSet(excursions=[], threshold=threshold)
    edges = np.diff(above.astype(np.int8))
    starts = list(np.nonzero(edges == 1)[0] + 1)
    ends = list(np.nonzero(edges == -1)[0] + 1)
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        ends.append(path.values.size)
    exc = [
        Excursion(start=s, end=e, maximum=float(path.values[s:e].max()),
                  duration=(e - s) * path.dt)
        for s, e in zip(starts, ends)
    ]
    return ExcursionSet(excursions=exc, threshold=threshold)


def local_time(path: SamplePath, delta: float, epsilon_ladder,
               threshold: float | None = None) -> LocalTimeProfile:
    """Unnormalized local time at zero from excursion counts.

    Counts excursions of duration at least eps and scales by
    eps^(1 - delta/2); the finest rung of the ladder provides the profile,
    the coarser rungs are kept as consistency diagnostics.  The excursion
    measure constant is unknown, so downstream use sticks to ratios and
    exponents.
    """
    if not (0.0 < delta < 2.0):
        raise ValueError(f"local time at zero needs delta in (0,2), got {delta}")
    ladder = np.asarray(sorted(epsilon_ladder, reverse=True), dtype=float)
    if ladder.size == 0 or np.any(ladder <= 0):
        raise ValueError("epsilon ladder must be positive")
    if threshold is None:
        threshold = zero_threshold(path.dt)
    exc = decompose_excursions(path, threshold)
    scale = 1.0 - 0.5 * delta
    durations = exc.durations() if len(exc) else np.empty(0)
    ladder_values = {float(eps): float(eps ** scale * np.count_nonzero(durations >= eps))
                     for eps in ladder}
    finest = ladder[-1]
    ell = np.zeros(path.values.size)
    for e in exc.excursions:
        if e.duration >= finest and e.end < ell.size:
            ell[e.end:] += 1.0
    ell *= finest ** scale
    return LocalTimeProfile(times=path.times, ell=ell, epsilon_ladder=ladder,
                            ladder_values=ladder_values)


def zero_set_dimension(path, threshold: float | None = None, full: bool = False):
    """Box-counting dimension of the near-zero set, via dyadic covers.

    Accepts one path or a list of paths on a common grid; lists are pooled
    (counts summed per scale) before the log-log regression.  Three details
    are calibrated against exact reflected Brownian motion: the detection
    level is sqrt(dt), tighter than the pathwise default, because 3 sqrt(dt)
    visibly thickens the zero set at reachable scales; adjacent occupied
    boxes are merged so a threshold cluster straddling a box boundary
    counts once; and scales below 64 grid steps are excluded.
    """
    paths = path if isinstance(path, (list, tuple)) else [path]
    dt = paths[0].dt
    n = min(p.values.size for p in paths)
    if threshold is None:
        threshold = math.sqrt(dt)
    zero_sets = [np.nonzero(p.values[:n] < threshold)[0] for p in paths]
    if all(z.size == 0 for z in zero_sets):
        # an empty zero set has dimension zero by convention
        return (0.0, {"scales": np.empty(0), "counts": np.empty(0)}) if full else 0.0

    k_min, k_max = 6, int(np.log2(n)) - 2
    scales = 2 ** np.arange(k_min, k_max + 1)
    counts = np.zeros(scales.size)
    for z in zero_sets:
        for i, s in enumerate(scales):
            occ = np.unique(z // s)
            counts[i] += np.count_nonzero(np.diff(occ) > 1) + 1
    usable = counts >= 4 * len(paths)
    if usable.sum() < 3:
        raise ValueError("fewer than 3 usable dyadic scales; simulate a longer path")
    log_inv_s = -np.log2(scales[usable].astype(float))
    log_n = np.log2(counts[usable])
    slope, intercept = np.polyfit(log_inv_s, log_n, 1)
    if not full:
        return float(slope)
    resid = log_n - (slope * log_inv_s + intercept)
    return float(slope), {
        "scales": scales[usable] * dt,
        "counts": counts[usable],
        "residuals": resid,
        "intercept": float(intercept),
    }
