"""Acceptance suites: one callable per criterion, tolerances from the config.

Each suite returns a TestReport whose statistics print one pass/fail line
apiece.  Everything is deterministic given the config seed; suites never
tune thresholds after seeing data.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats as sstats

from . import bessel, coupling, gff, levy, loewner, lqg, mating
from .config import RunConfig
from .randomness import stream
from .reports import Statistic, TestReport, stat_bound, stat_close, stat_pvalue
from .stats import hill_plateau, log_log_slope

__all__ = ["SUITES", "run_suite", "run_all"]


def _admissible_grid(n_kappa: int = 10, n_rho: int = 10):
    pairs = []
    for kappa in np.linspace(0.3, 3.9, n_kappa):
        lo = max(kappa / 2.0 - 4.0, -2.0 - kappa / 2.0)
        for frac in np.linspace(0.05, 0.95, n_rho):
            pairs.append((float(kappa), float(lo + frac * (-2.0 - lo))))
    return pairs


def exponents_suite(cfg: RunConfig) -> TestReport:
    tol = cfg.tolerance("kpz_match")
    pairs = _admissible_grid()
    worst_kpz = 0.0
    worst_beta = 0.0
    worst_delta = 0.0
    for kappa, rho in pairs:
        sheet = levy.exponents(kappa, rho)
        lhs, rhs, _ = levy.kpz_consistency(kappa, rho)
        worst_kpz = max(worst_kpz, abs(lhs - rhs))
        worst_beta = max(worst_beta, abs(sheet.beta_intensity + 1.0 + sheet.alpha_stable))
        worst_delta = max(worst_delta, abs(sheet.delta_bead - (2.0 - sheet.alpha_stable)))
    # boundary-of-window checks evaluate the closed forms directly
    kappa_b, rho_b = 3.0, 3.0 / 2.0 - 4.0
    dim_b = -(2.0 + rho_b) * (kappa_b + 8.0 + 2.0 * rho_b) / (2.0 * kappa_b)
    kp = 16.0 / 3.0
    alpha_16 = levy.exponents(1.6, 1.6 - 4.0).alpha_stable
    stats = [
        stat_close("kpz identity on 100-point grid", worst_kpz, 0.0, tol,
                   "quadratic dimension relation"),
        stat_close("beta = -(1+alpha)", worst_beta, 0.0, 1e-14, "exponent algebra"),
        stat_close("delta = 2-alpha", worst_delta, 0.0, 1e-14, "exponent algebra"),
        stat_close("boundary dim at rho=kappa/2-4", dim_b,
                   2.0 - 8.0 / kp, 1e-14, "dual-parameter boundary dimension"),
        stat_close("alpha at rho=kappa-4, kappa=1.6", alpha_16, 1.5, 1e-14,
                   "stable index closed form"),
    ]
    return TestReport(suite="exponents", seed=cfg.seed,
                      params={"grid": len(pairs)}, statistics=stats)


def bessel_scaling_suite(cfg: RunConfig) -> TestReport:
    p_min = cfg.tolerance("scaling_ks_p")
    dim_tol = cfg.tolerance("zero_dim")
    n = int(cfg.value("bessel", "n_paths", float))
    stats = []
    for i, delta in enumerate((0.5, 1.0, 1.5, 3.0)):
        x1 = bessel.bes_terminal(delta, 0.0, 1.0, stream(cfg.seed, 10, i), n)
        x4 = bessel.bes_terminal(delta, 0.0, 4.0, stream(cfg.seed, 11, i), n) / 2.0
        p = sstats.ks_2samp(x1, x4).pvalue
        stats.append(stat_pvalue(f"scaling ks delta={delta}", p, p_min,
                                 "Brownian scaling of the Bessel law"))
    x = bessel.bes_terminal(1.0, 0.0, 1.0, stream(cfg.seed, 12), n)
    p_abs = sstats.kstest(x, lambda v: 2.0 * sstats.norm.cdf(v) - 1.0).pvalue
    stats.append(stat_pvalue("delta=1 equals reflected normal", p_abs, p_min,
                             "dimension one is reflected Brownian motion"))
    n_grid = 2 ** 20
    dt = 1.0 / n_grid
    for delta, width, tag in ((1.0, 16, 13), (1.5, 32, 14)):
        rng = stream(cfg.seed, tag)
        vals = bessel.besq_ensemble(delta, 0.0, 1.0, dt, rng, width, scheme="exact")
        paths = [bessel.SamplePath(t0=0.0, dt=dt, values=np.sqrt(v)) for v in vals]
        est = bessel.zero_set_dimension(paths)
        stats.append(stat_close(f"zero-set dimension delta={delta}", est,
                                1.0 - delta / 2.0, dim_tol,
                                "box dimension of the zero set"))
    return TestReport(suite="bessel_scaling", seed=cfg.seed,
                      params={"n": n, "n_grid": n_grid}, statistics=stats)


def prop21_suite(cfg: RunConfig) -> TestReport:
    ladder = cfg.value("bessel", "eps_ladder", tuple)
    delta = 0.5
    dt = 1e-4
    n_paths = 1500
    res = bessel.coupled_eps_ladder(delta, 1.0, ladder, 2.0, dt,
                                    stream(cfg.seed, 20), n_paths)
    j_means = [float(j.mean()) for j in res["j_eps2"]]
    g_means = [float(g.mean()) for g in res["sup_gap"]]
    stats = []
    for i in range(len(ladder) - 1):
        se = 3.0 * res["j_eps2"][i + 1].std() / math.sqrt(n_paths)
        stats.append(stat_bound(
            f"J^(eps^2) decreasing {ladder[i]}->{ladder[i + 1]}",
            j_means[i + 1], j_means[i] + se,
            "squared-jump totals vanish along the ladder"))
        stats.append(stat_bound(
            f"coupled sup-distance decreasing {ladder[i]}->{ladder[i + 1]}",
            g_means[i + 1], g_means[i],
            "restarted processes converge to the Bessel path"))

    # principal-value ladder consistency on shared noise
    shrink = cfg.tolerance("pv_cauchy_shrink")
    rng = stream(cfg.seed, 21)
    n_steps = int(round(1.0 / dt))
    gaps = []
    n_rep = 40
    for r in range(n_rep):
        dw = stream(cfg.seed, 21, r).standard_normal(n_steps) * math.sqrt(dt)
        pvs = []
        for eps in ladder:
            path, jumps = bessel.simulate_eps_bes(delta, 0.0, eps, 1.0, dt,
                                                  None, dw=dw)
            j = bessel.jump_process(path, jumps)
            pvs.append(bessel.pv_integral(path, j, delta, 0.0).values)
        gaps.append([np.max(np.abs(pvs[i] - pvs[i + 1])) for i in range(len(pvs) - 1)])
    gaps = np.asarray(gaps).mean(axis=0)
    for i in range(len(gaps) - 1):
        stats.append(stat_bound(
            f"pv cauchy gap shrinks by {shrink:.0%} ({ladder[i + 1]} vs {ladder[i + 2]})",
            gaps[i + 1], (1.0 - shrink) * gaps[i],
            "principal value is a Cauchy sequence in eps"))
    return TestReport(suite="prop21_ladder", seed=cfg.seed,
                      params={"ladder": ladder, "dt": dt, "n_paths": n_paths,
                              "pv_replicas": n_rep},
                      statistics=stats, notes=[f"j_means={j_means}",
                                               f"gap_means={g_means}",
                                               f"pv_gaps={list(gaps)}"])


def loewner_suite(cfg: RunConfig) -> TestReport:
    dt = cfg.value("loewner", "dt", float)
    mult = cfg.tolerance("slit_error_mult")
    hydro_tol = cfg.tolerance("hydro_residual")
    cap_tol = cfg.tolerance("capacity_rel")
    n = int(round(1.0 / dt))
    zeros = loewner.DrivingFunction(times=dt * np.arange(n + 1), W=np.zeros(n + 1),
                                    V=np.empty(0), X=np.empty(0), kappa=2.0,
                                    rho=(0.0,), direction="forward", delta=1.0)
    tr0 = loewner.trace_curve(zeros, stride=8)
    h = tr0.meta["h_trace"]
    stats = [
        stat_bound("slit trace horizontal deviation", float(np.max(np.abs(tr0.points.real))),
                   mult * h, "vertical slit closed form"),
        stat_close("slit tip height", float(tr0.points[-1].imag), 2.0,
                   mult * math.sqrt(dt), "vertical slit closed form"),
    ]
    g1 = loewner.forward_map(zeros, 100j, 1.0)
    stats.append(stat_bound("hydrodynamic residual (slit)",
                            abs(g1.z_image - 100j - 2.0 / 100j), hydro_tol,
                            "capacity normalization at large z"))
    drv = loewner.sample_forward_driving(cfg.kappa, cfg.rho, 1.0, dt, stream(cfg.seed, 30))
    g1 = loewner.forward_map(drv, 100j, 1.0)
    stats.append(stat_bound("hydrodynamic residual (light cone)",
                            abs(g1.z_image - 100j - 2.0 / 100j), hydro_tol,
                            "capacity normalization at large z"))
    tr_a = loewner.trace_curve(drv, stride=16)
    tr_b = loewner.trace_curve(drv, stride=8)
    cap_a = loewner.capacity_from_points(tr_a.points)
    cap_b = loewner.capacity_from_points(tr_b.points)
    richardson = 2.0 * cap_b - cap_a
    stats.append(stat_close("traced-hull capacity / 2t", richardson / 2.0, 1.0,
                            cap_tol, "weld-down capacity oracle"))
    return TestReport(suite="loewner", seed=cfg.seed, params={"dt": dt},
                      statistics=stats)


def jump_law_suite(cfg: RunConfig) -> TestReport:
    kappa = 1.6
    rho = kappa - 4.0
    p_min = cfg.tolerance("ks_p")
    chi2_p = cfg.tolerance("chi2_p")
    energy_p = cfg.tolerance("energy_p")
    hill_tol = cfg.tolerance("hill_alpha")
    alpha = 4.0 / kappa - 1.0
    stats = []

    # expected counts against the closed-form tail mass
    n_rep = 3000
    counts = np.array([levy.sample_jump_ppp(kappa, 1.0, 1.0, 1.0,
                                            stream(cfg.seed, 40, r)).shape[0]
                       for r in range(n_rep)])
    expected = 1.0 / (4.0 / kappa - 1.0)
    se = counts.std(ddof=1) / math.sqrt(n_rep)
    stats.append(stat_close("ppp count mean", counts.mean(), expected, 3.0 * se,
                            "closed-form intensity mass"))

    # tail exponent of the sampled magnitudes
    pts = levy.sample_jump_ppp(kappa, 1.0, 200.0, 1.0, stream(cfg.seed, 41))
    t = np.sort(pts[:, 1])
    surv = 1.0 - (np.arange(t.size) + 0.5) / t.size
    keep = surv > 20.0 / t.size
    slope, _ = log_log_slope(t[keep], surv[keep])
    stats.append(stat_close("survival slope", slope, -alpha, 0.1,
                            "power-law magnitude tail"))

    # halving t_min scales counts by 2^(4/kappa - 1)
    c1 = np.array([levy.sample_jump_ppp(kappa, 1.0, 1.0, 1.0,
                                        stream(cfg.seed, 42, r)).shape[0]
                   for r in range(n_rep)])
    c2 = np.array([levy.sample_jump_ppp(kappa, 1.0, 1.0, 2.0,
                                        stream(cfg.seed, 43, r)).shape[0]
                   for r in range(n_rep)])
    ratio = c1.mean() / c2.mean()
    stats.append(stat_close("cutoff doubling count ratio", ratio, 2.0 ** alpha,
                            0.10 * 2.0 ** alpha, "intensity tail scaling"))

    # uniform split and the two-dimensional density
    pts = levy.sample_jump_ppp(kappa, 1.0, 1000.0, 1.0, stream(cfg.seed, 44))
    trip = levy.split_jumps(pts, stream(cfg.seed, 45))
    frac = trip[:, 1] / (trip[:, 1] + trip[:, 2])
    stats.append(stat_pvalue("split uniformity ks", sstats.kstest(frac, "uniform").pvalue,
                             p_min, "uniform split of each jump"))
    x, y = trip[:, 1], trip[:, 2]
    box = (x < 3.0) & (y < 3.0) & (x + y > 1.0)
    xb, yb = x[box], y[box]
    edges = np.linspace(0.0, 3.0, 7)
    obs, _, _ = np.histogram2d(xb, yb, bins=[edges, edges])
    dens = np.zeros_like(obs)
    mids = 0.5 * (edges[:-1] + edges[1:])
    fine = np.linspace(0, 1, 6)[:, None, None]
    for i in range(mids.size):
        for j in range(mids.size):
            xs = edges[i] + (edges[i + 1] - edges[i]) * np.linspace(0.05, 0.95, 6)
            ys = edges[j] + (edges[j + 1] - edges[j]) * np.linspace(0.05, 0.95, 6)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            s = gx + gy
            val = np.where(s > 1.0, s ** (-4.0 / kappa - 1.0), 0.0)
            dens[i, j] = val.mean() * (edges[i + 1] - edges[i]) * (edges[j + 1] - edges[j])
    keep = dens.ravel() > 0
    model = dens.ravel()[keep] / dens.ravel()[keep].sum() * obs.sum()
    o = obs.ravel()[keep]
    merged_o, merged_m = [], []
    acc_o = acc_m = 0.0
    for oo, mm in zip(o, model):
        acc_o += oo
        acc_m += mm
        if acc_m >= 8.0:
            merged_o.append(acc_o)
            merged_m.append(acc_m)
            acc_o = acc_m = 0.0
    if acc_m > 0:
        merged_o[-1] += acc_o
        merged_m[-1] += acc_m
    merged_o = np.asarray(merged_o)
    merged_m = np.asarray(merged_m) * merged_o.sum() / np.sum(merged_m)
    chi2 = float(((merged_o - merged_m) ** 2 / merged_m).sum())
    dof = merged_o.size - 1
    p_chi = sstats.chi2.sf(chi2, dof)
    stats.append(stat_pvalue("2d intensity chi2", p_chi, chi2_p,
                             "matched-jump density (x+y)^(alpha-1)"))

    # self-similarity collapse and the stability index
    n_paths = int(cfg.value("levy", "n_paths", float))
    paths = [levy.sample_lr_path(kappa, rho, 1.0, 1.0, 1e-4, 1.0 / 64,
                                 stream(cfg.seed, 46, r)) for r in range(n_paths)]
    c = 8.0
    k_c = int(round((len(paths[0].grid) - 1) / c))
    full = np.array([[p.L[-1], p.R[-1]] for p in paths]) * c ** (-1.0 / alpha)
    part = np.array([[p.L[k_c], p.R[k_c]] for p in paths])
    from .stats import energy_distance_test
    _, p_energy = energy_distance_test(full, part, n_perm=200, rng=stream(cfg.seed, 47))
    stats.append(stat_pvalue("self-similarity energy distance (c=8)", p_energy,
                             energy_p, "stable scaling of the matched pair"))
    est, detail = levy.estimate_stability_index(paths, full=True)
    stats.append(stat_close("stability index", detail["hill"], alpha, hill_tol,
                            "tail estimate of the stable index"))
    return TestReport(suite="jump_law", seed=cfg.seed,
                      params={"kappa": kappa, "rho": rho, "n_paths": n_paths},
                      statistics=stats,
                      ensemble_sizes={"ppp_replicas": n_rep, "split_points": int(trip.shape[0])})


def ladder_suite(cfg: RunConfig) -> TestReport:
    kappa, rho = 1.6, -2.4
    sheet = levy.exponents(kappa, rho)
    alpha = sheet.alpha_stable
    dim_tol = cfg.tolerance("ladder_dim")
    rel = cfg.tolerance("record_index_rel")
    # one long path for the record-set dimension
    path = levy.sample_lr_path(kappa, rho, 1.0, 8.0, 2e-4, 1e-3,
                               stream(cfg.seed, 50))
    lad = levy.ladder_height(path)
    est = levy.range_dimension_estimate(lad)
    stats = [
        stat_close("record range dimension", est, alpha - 1.0, dim_tol,
                   "ladder heights form a stable subordinator"),
        stat_bound("records available", -float(lad.n_records), -1000.0,
                   "estimator precondition"),
    ]
    # record-count growth vs the inverse-local-time index, ensemble averaged
    ratios = []
    for r in range(60):
        p = levy.sample_lr_path(kappa, rho, 1.0, 2.0, 1e-3, 1e-3,
                                stream(cfg.seed, 51, r))
        lad = levy.ladder_height(p)
        mid = p.T / 2.0
        n_half = int(np.searchsorted(lad.record_times, mid))
        if n_half > 4:
            ratios.append(lad.n_records / n_half)
    target = 2.0 ** (1.0 - 1.0 / alpha)
    obs = float(np.mean(ratios))
    stats.append(stat_close("record count doubling ratio", obs, target,
                            rel * target, "inverse local time index"))
    # second parameter pair for the range dimension target
    est2_target = levy.exponents(3.0, -2.2).ladder_index
    path2 = levy.sample_lr_path(3.0, -2.2, 1.0, 8.0, 2e-4, 1e-3,
                                stream(cfg.seed, 52))
    lad2 = levy.ladder_height(path2)
    est2 = levy.range_dimension_estimate(lad2)
    stats.append(stat_close("record range dimension (second pair)", est2,
                            est2_target, dim_tol,
                            "ladder index at a second parameter pair"))
    return TestReport(suite="ladder_dimension", seed=cfg.seed,
                      params={"kappa": kappa, "rho": rho},
                      statistics=stats,
                      ensemble_sizes={"records": int(lad.n_records), "ratio_paths": len(ratios)})


def beads_suite(cfg: RunConfig) -> TestReport:
    exp_tol = cfg.tolerance("bead_exponent")
    ratio_rel = cfg.tolerance("maxima_ratio_rel")
    budget_n = int(cfg.value("lqg", "bead_budget", float))
    stats = []
    for i, (kappa, rho) in enumerate(((3.0, -2.2), (1.6, -2.4))):
        delta = 1.0 + 2.0 * (rho + 2.0) / kappa
        spec = lqg.WedgeSpec(gamma=math.sqrt(kappa), weight=rho + 2.0)
        budget = budget_n * (2.0 - delta)
        surf = lqg.sample_thin_wedge(spec, 1.0, budget, stream(cfg.seed, 60, i))
        lens = surf.boundary_lengths()
        hill, _ = hill_plateau(lens)
        stats.append(stat_close(f"bead length intensity exponent ({kappa},{rho})",
                                -(1.0 + hill), delta - 3.0, exp_tol,
                                "bubble boundary-length point process"))
        mx = surf.maxima()
        ratio = float((mx >= 1.0).sum()) / max((mx >= 2.0).sum(), 1)
        target = 2.0 ** (2.0 - delta)
        stats.append(stat_close(f"maxima tail ratio ({kappa},{rho})", ratio, target,
                                ratio_rel * target, "maxima point process tail"))
        d1 = np.array([lqg.sample_bead_excursion(delta, 1.0, stream(cfg.seed, 61, i, r)).duration
                       for r in range(250)])
        c = 3.0
        dc = np.array([lqg.sample_bead_excursion(delta, c, stream(cfg.seed, 62, i, r)).duration
                       for r in range(250)]) / (c * c)
        p = sstats.ks_2samp(d1, dc).pvalue
        stats.append(stat_pvalue(f"bead scaling ks ({kappa},{rho})", p,
                                 cfg.tolerance("ks_p"),
                                 "conditioned bead scales like the square of its maximum"))
    return TestReport(suite="thin_wedge_beads", seed=cfg.seed,
                      params={"budget_n": budget_n}, statistics=stats)


def reverse_coupling_suite(cfg: RunConfig) -> TestReport:
    kappa = 3.0
    rho_tilde = cfg.value("coupling", "rho_tilde", float)
    tau = cfg.value("coupling", "tau", float)
    dt = cfg.value("coupling", "dt", float)
    n = int(cfg.value("coupling", "n_coupling", float))
    phis = [coupling.make_bump(0.0 + 1.15j, 0.5, 1.0, k=12, name="phi1"),
            coupling.make_bump(0.8 + 1.8j, 0.5, 1.0, k=12, name="phi2"),
            coupling.make_bump(-0.9 + 1.4j, 0.4, 0.8, k=12, name="phi3")]
    rep = coupling.reverse_coupling_test(kappa, rho_tilde, tau, phis, n=n,
                                         seed=cfg.seed + 8, dt=dt)
    n_m = int(cfg.value("coupling", "n_martingale", float))
    rep_m = coupling.martingale_green_test(kappa, rho_tilde, [1j, 2j], [0.5 + 1.5j],
                                           T=1.0, n=n_m, seed=cfg.seed + 9, dt=dt)
    return TestReport(suite="reverse_coupling_and_martingale", seed=cfg.seed,
                      params=dict(rep.params, n_martingale=n_m),
                      statistics=rep.statistics + rep_m.statistics,
                      ensemble_sizes={"coupling": n, "martingale": n_m})


def identity_suite(cfg: RunConfig) -> TestReport:
    rho_tilde = cfg.value("coupling", "rho_tilde", float)
    ladder = cfg.value("coupling", "identity_ladder", tuple)
    dt = cfg.value("coupling", "identity_dt", float)
    return coupling.reverse_identity_test(3.0, rho_tilde, 1 + 1j, 0.5, ladder,
                                          seed=cfg.seed + 10, dt=dt)


def mating_suite(cfg: RunConfig) -> TestReport:
    n_jumps = int(cfg.value("mating", "n_jumps", float))
    resolution = int(cfg.value("mating", "resolution", float))
    grid_n = int(cfg.value("mating", "grid_n", float))
    arc_cells = cfg.tolerance("arc_tol_cells")
    stats = []
    adj_tol = 5.0 / grid_n
    for i, sub in enumerate((1, 2, 3)):
        p = mating.synthetic_matched_path(n_jumps, stream(cfg.seed, 70, sub))
        cp = mating.compactify_contours(p, resolution=resolution)
        gm = mating.build_quotient(cp, n=grid_n, adjacency_tol=adj_tol)
        disks = mating.extract_disks(gm)
        stats.append(stat_close(f"disk count (path {i})", len(disks), n_jumps, 0,
                                "one disk per matched jump"))
        worst = max(max(abs(d["left_arc"] - d["grid_left_arc"]),
                        abs(d["right_arc"] - d["grid_right_arc"])) for d in gm.disks)
        stats.append(stat_bound(f"arc bookkeeping (path {i})", worst,
                                arc_cells / grid_n, "arc lengths match the jumps"))
        rep = mating.verify_topology(gm)
        stats.append(Statistic(f"topology checks (path {i})", float(rep["pass"]), 1.0,
                               0.0, rep["pass"], "combinatorial quotient structure"))
        gm2 = mating.build_quotient(cp, n=2 * grid_n, adjacency_tol=adj_tol)
        same = gm.meta["adjacency"] == gm2.meta["adjacency"]
        stats.append(Statistic(f"adjacency refinement stable (path {i})", float(same),
                               1.0, 0.0, bool(same), "resolution independence"))
        tot = sum(d["left_arc"] + d["right_arc"] for d in disks)
        expect = float((p.jumps[:, 1] + p.jumps[:, 2]).sum())
        stats.append(stat_close(f"total disk boundary (path {i})", tot, expect,
                                1e-9 * max(1.0, expect), "jump bookkeeping"))
    # negative control: a chord through a strip must be caught
    p = mating.synthetic_matched_path(n_jumps, stream(cfg.seed, 70, 1))
    cp = mating.compactify_contours(p, resolution=resolution)
    gm = mating.build_quotient(cp, n=grid_n)
    strip_nodes = np.nonzero(gm.meta["in_strip"].ravel())[0][:4]
    bad = gm.chords + [("corrupt", strip_nodes[:2], strip_nodes[2:4])]
    rep = mating.verify_topology(gm, chords=bad)
    stats.append(Statistic("negative control: corrupted chord detected",
                           float(not rep["pass"]), 1.0, 0.0, not rep["pass"],
                           "crossing check rejects strip chords"))
    return TestReport(suite="mating_quotient", seed=cfg.seed,
                      params={"n_jumps": n_jumps, "grid_n": grid_n},
                      statistics=stats)


def cut_wedge_suite(cfg: RunConfig) -> TestReport:
    n = int(cfg.value("coupling", "cut_wedge_n", float))
    sep_T = cfg.value("coupling", "separation_T", float)
    return coupling.cut_wedge_test(cfg.kappa, cfg.rho, n=n, seed=cfg.seed + 11,
                                   sep_T=sep_T)


def excursion_suite(cfg: RunConfig) -> TestReport:
    n = int(cfg.value("coupling", "excursion_n", float))
    dt = cfg.value("coupling", "excursion_dt", float)
    return coupling.excursion_law_test(cfg.kappa, cfg.rho, 1.0, n=n,
                                       seed=cfg.seed + 12, dt=dt)


SUITES = {
    "exponents": exponents_suite,
    "bessel-scaling": bessel_scaling_suite,
    "prop21-ladder": prop21_suite,
    "loewner": loewner_suite,
    "jump-law": jump_law_suite,
    "ladder-dimension": ladder_suite,
    "beads": beads_suite,
    "reverse-coupling": reverse_coupling_suite,
    "identity": identity_suite,
    "mating": mating_suite,
    "cut-wedge": cut_wedge_suite,
    "excursion": excursion_suite,
}


def run_suite(name: str, cfg: RunConfig) -> TestReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](cfg)


def run_all(cfg: RunConfig, names=None) -> list:
    names = sorted(SUITES) if names is None else list(names)
    if cfg.threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {name: pool.submit(_run_one, name, cfg) for name in names}
            return [futures[name].result() for name in names]
    return [run_suite(name, cfg) for name in names]


def _run_one(name: str, cfg: RunConfig) -> TestReport:
    return run_suite(name, cfg)
