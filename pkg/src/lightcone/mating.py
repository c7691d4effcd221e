"""Gluing the two boundary-length contours into a disk-decorated quotient.

Each matched jump of the pair (L, R) is replaced by a linear segment whose
duration is the squared jump of L - R, producing continuous contours; time
and values are then compactified through x -> x/(1+|x|).  Drawing the
compactified R on the bottom and 3 minus the compactified L on top of the
rectangle [0,1] x [-1,4] and gluing

  - horizontal chords below the bottom graph,
  - horizontal chords above the top graph, and
  - vertical chords between the graphs away from the jump strips

yields a quotient in which every jump strip becomes a doubly marked disk:
its opening and closing points are the glued vertical segments bounding
the strip, and its two boundary arcs carry the jump sizes (dL, dR).  The
quotient is computed combinatorially on a grid with a union-find pass
(via sparse connected components); topological claims are checked only
through their combinatorial consequences.

Ties on strip boundaries are resolved toward "not merged": a column
strictly inside a jump interval never participates in a chord, which
keeps disks separated at every resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .levy import StablePath

__all__ = [
    "ContourPair",
    "GluedMap",
    "synthetic_matched_path",
    "compactify_contours",
    "build_quotient",
    "extract_disks",
    "verify_topology",
]


def synthetic_matched_path(n_jumps: int, rng, T: float = 0.4,
                           drift: float = 0.05) -> StablePath:
    """Hand-built matched-jump path whose strips resolve at modest grids.

    Jump times jitter around an even spacing and sizes stay within a
    narrow band, so every inserted segment spans several columns at the
    default resolution and the gaps between strips stay positive.
    """
    spacing = T / (n_jumps + 1)
    s = spacing * (np.arange(1, n_jumps + 1) + 0.5 * (rng.uniform(size=n_jumps) - 0.5))
    t = 0.22 + 0.06 * rng.uniform(size=n_jumps)
    u = 0.15 + 0.7 * rng.uniform(size=n_jumps)
    d_l = t * u
    d_r = t - d_l
    jumps = np.column_stack([s, d_l, d_r])
    grid = np.linspace(0.0, T, 41)
    counts = np.searchsorted(s, grid, side="right")
    cl = np.concatenate([[0.0], np.cumsum(d_l)])
    cr = np.concatenate([[0.0], np.cumsum(d_r)])
    return StablePath(T=T, jumps=jumps, drift=(-drift, drift), grid=grid,
                      L=cl[counts] - drift * grid, R=-cr[counts] + drift * grid,
                      meta={"synthetic": True})


def _phi(x):
    return x / (1.0 + np.abs(x))


def _phi_inv(u):
    return u / (1.0 - np.abs(u))


@dataclass
class ContourPair:
    """Compactified contours with exact piecewise-linear knots.

    ``knots_tau`` is the expanded (pre-compactification) clock at the
    breakpoints, ``knots_l``/``knots_r`` the contour values there.  The
    ``grid``/``Lhat``/``Rhat`` arrays sample the compactified picture at a
    fixed resolution, and ``intervals`` lists the jump strips as
    (u_start, u_end, dL, dR, jump_time).
    """

    knots_tau: np.ndarray
    knots_l: np.ndarray
    knots_r: np.ndarray
    grid: np.ndarray
    Lhat: np.ndarray
    Rhat: np.ndarray
    intervals: list
    u_max: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        starts = [iv[0] for iv in self.intervals]
        ends = [iv[1] for iv in self.intervals]
        for a, b in zip(starts, ends):
            if not b > a:
                raise ValueError("degenerate jump interval")
        for b, a_next in zip(ends[:-1], starts[1:]):
            if a_next < b:
                raise ValueError("jump intervals must be disjoint and ordered")
        step = np.max(np.abs(np.diff(self.Lhat))) if self.Lhat.size > 1 else 0.0
        step = max(step, np.max(np.abs(np.diff(self.Rhat))) if self.Rhat.size > 1 else 0.0)
        self.meta.setdefault("max_grid_step", float(step))

    def hat_values(self, u) -> tuple[np.ndarray, np.ndarray]:
        """Exact compactified contour values at arbitrary u via the knots."""
        tau = _phi_inv(np.asarray(u, float))
        lv = np.interp(tau, self.knots_tau, self.knots_l)
        rv = np.interp(tau, self.knots_tau, self.knots_r)
        return _phi(lv), _phi(rv)


def compactify_contours(path: StablePath, resolution: int = 2048) -> ContourPair:
    """Continuous contours from a matched-jump path, compactified to [0, 1).

    Each joint jump at time s becomes a linear segment of expanded duration
    (dL + dR)^2 over which L rises by dL and R falls by dR; drift runs
    between segments.  The sum of squared jumps is finite on any horizon,
    so the expanded clock is finite.
    """
    jumps = path.jumps if path.jumps.size else np.empty((0, 3))
    drift_l, drift_r = path.drift
    order = np.argsort(jumps[:, 0]) if jumps.size else []
    taus = [0.0]
    ls = [0.0]
    rs = [0.0]
    intervals = []
    t_prev = 0.0
    cur_l = 0.0
    cur_r = 0.0
    for idx in order:
        s, dl, dr = jumps[idx]
        seg = (dl + dr) ** 2
        # drift stretch since the previous event
        cur_l += drift_l * (s - t_prev)
        cur_r += drift_r * (s - t_prev)
        taus.append(taus[-1] + (s - t_prev))
        ls.append(cur_l)
        rs.append(cur_r)
        a_tau = taus[-1]
        cur_l += dl
        cur_r -= dr
        taus.append(a_tau + seg)
        ls.append(cur_l)
        rs.append(cur_r)
        intervals.append((a_tau, a_tau + seg, float(dl), float(dr), float(s)))
        t_prev = s
    cur_l += drift_l * (path.T - t_prev)
    cur_r += drift_r * (path.T - t_prev)
    taus.append(taus[-1] + (path.T - t_prev))
    ls.append(cur_l)
    rs.append(cur_r)

    knots_tau = np.asarray(taus)
    knots_l = np.asarray(ls)
    knots_r = np.asarray(rs)
    scale = max(1.0, np.max(np.abs(knots_l)), np.max(np.abs(knots_r)))
    if scale > 1.0:
        # keep compactified values comfortably inside (-1, 1): phi is only a
        # homeomorphism, so the combinatorics are invariant under this rescale
        knots_l = knots_l / scale
        knots_r = knots_r / scale
    u_max = float(_phi(knots_tau[-1]))
    grid = np.linspace(0.0, u_max, resolution)
    tau_grid = _phi_inv(grid)
    lhat = _phi(np.interp(tau_grid, knots_tau, knots_l))
    rhat = _phi(np.interp(tau_grid, knots_tau, knots_r))
    ivs = [(float(_phi(a)), float(_phi(b)), dl / scale, dr / scale, s)
           for a, b, dl, dr, s in intervals]
    return ContourPair(knots_tau=knots_tau, knots_l=knots_l, knots_r=knots_r,
                       grid=grid, Lhat=lhat, Rhat=rhat, intervals=ivs, u_max=u_max,
                       meta={"value_scale": scale, "T": path.T})


@dataclass
class GluedMap:
    """Quotient classes over the rectangle grid plus the extracted disk table."""

    n: int
    labels: np.ndarray          # (n_cols, n_rows) component ids; -1 marks strip nodes
    cols: np.ndarray
    rows: np.ndarray
    bottom: np.ndarray          # Rhat at the columns
    top: np.ndarray             # 3 - Lhat at the columns
    strip_col: np.ndarray       # boolean: column strictly inside a jump interval
    disks: list                 # dicts per marked interval
    chords: list                # (kind, index payload) merge records
    contour: ContourPair
    meta: dict = field(default_factory=dict)

    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def peano_order(self):
        """Disk visit order along u -> 3 - Lhat (== interval order)."""
        return list(range(len(self.disks)))

    def to_json(self, path=None) -> str:
        payload = {
            "n": self.n,
            "n_disks": len(self.disks),
            "disks": [
                {k: d[k] for k in ("interval", "opening_class", "closing_class",
                                   "left_arc", "right_arc", "jump_time")}
                for d in self.disks
            ],
            "adjacency": self.meta.get("adjacency", []),
            "n_classes": self.n_classes(),
        }
        text = json.dumps(payload, indent=1, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_svg(self, path) -> None:
        """Plot-data rendering: the two graphs and the jump strips."""
        u = self.cols
        W, H = 720.0, 480.0
        sx = lambda x: x / max(self.contour.u_max, 1e-9) * W
        sy = lambda y: H - (y + 1.0) / 5.0 * H
        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}">']
        for a, b, *_ in self.contour.intervals:
            parts.append(f'<rect x="{sx(a):.2f}" y="0" width="{max(sx(b) - sx(a), 1.0):.2f}" '
                         f'height="{H:.0f}" fill="#ffe680" stroke="none"/>')
        for vals, color in ((self.bottom, "#1f77b4"), (self.top, "#2ca02c")):
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(u, vals))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
        parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(parts))


def _horizontal_edges(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    both = mask[:-1, :] & mask[1:, :]
    i, k = np.nonzero(both)
    n_rows = mask.shape[1]
    return i * n_rows + k, (i + 1) * n_rows + k


def _vertical_edges(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    both = mask[:, :-1] & mask[:, 1:]
    i, k = np.nonzero(both)
    n_rows = mask.shape[1]
    return i * n_rows + k, i * n_rows + (k + 1)


def build_quotient(cp: ContourPair, n: int = 512,
                   adjacency_tol: float | None = None) -> GluedMap:
    """Union-find gluing of the rectangle grid along the three chord rules."""
    if n < 64:
        raise ValueError("grid resolution below 64 cannot separate chords")
    cols = np.linspace(0.0, cp.u_max, n)
    rows = np.linspace(-1.0, 4.0, n)
    lhat, rhat = cp.hat_values(cols)
    bottom = rhat
    top = 3.0 - lhat
    strip_col = np.zeros(n, dtype=bool)
    col_index = {}
    du = cols[1] - cols[0]
    problems = []
    for j, (a, b, *_rest) in enumerate(cp.intervals):
        inside = (cols > a) & (cols < b)
        if inside.sum() < 2:
            problems.append((j, "strip thinner than two columns"))
        strip_col |= inside
        col_index[j] = np.nonzero(inside)[0]
    for j in range(len(cp.intervals) - 1):
        gap = cp.intervals[j + 1][0] - cp.intervals[j][1]
        if gap < du:
            problems.append((j, "no regular column between adjacent strips"))
    if problems:
        widths = [b - a for a, b, *_ in cp.intervals]
        gaps = [cp.intervals[j + 1][0] - cp.intervals[j][1]
                for j in range(len(cp.intervals) - 1)] or [math.inf]
        need = max(3.0 * cp.u_max / min(widths), 1.5 * cp.u_max / max(min(gaps), 1e-12))
        raise ValueError(
            f"resolution n={n} too coarse to separate chords: {problems[:4]}; "
            f"use n >= {int(math.ceil(need))}")

    below = bottom[:, None] >= rows[None, :]          # node at or below the bottom graph
    above = top[:, None] <= rows[None, :]             # node at or above the top graph
    between = (rows[None, :] >= bottom[:, None]) & (rows[None, :] <= top[:, None])
    in_strip = between & strip_col[:, None]
    below &= ~in_strip
    above &= ~in_strip

    edges_u, edges_v, chords = [], [], []
    for kind, mask in (("below", below), ("above", above)):
        a, b = _horizontal_edges(mask)
        edges_u.append(a)
        edges_v.append(b)
        chords.append((kind, a, b))
    vert_mask = between & ~strip_col[:, None]
    a, b = _vertical_edges(vert_mask)
    edges_u.append(a)
    edges_v.append(b)
    chords.append(("vertical", a, b))

    n_nodes = n * n
    ii = np.concatenate(edges_u)
    jj = np.concatenate(edges_v)
    graph = sparse.coo_matrix((np.ones(ii.size, dtype=np.int8), (ii, jj)),
                              shape=(n_nodes, n_nodes))
    _, labels = connected_components(graph, directed=False)
    labels = labels.reshape(n, n)

    disks = []
    between_col_class = np.full(n, -1, dtype=int)
    for i in range(n):
        if not strip_col[i]:
            kidx = np.nonzero(between[i])[0]
            if kidx.size:
                between_col_class[i] = labels[i, kidx[0]]

    def _nearest_regular(i0: int, step: int) -> int:
        i = i0
        while 0 <= i < n and strip_col[i]:
            i += step
        return i if 0 <= i < n else -1

    scale = cp.meta.get("value_scale", 1.0)
    for j, (a_u, b_u, dl, dr, s_jump) in enumerate(cp.intervals):
        inside = col_index[j]
        left_col = _nearest_regular(inside[0] - 1, -1)
        right_col = _nearest_regular(inside[-1] + 1, +1)
        opening = int(between_col_class[left_col]) if left_col >= 0 else -1
        closing = int(between_col_class[right_col]) if right_col >= 0 else -1
        # grid arcs: contour change between the bounding regular columns,
        # measured back in uncompactified units; the stubs outside the strip
        # only carry drift, so the error stays at the grid scale
        if left_col >= 0 and right_col >= 0:
            gl = float(_phi_inv(lhat[right_col]) - _phi_inv(lhat[left_col])) * scale
            gr = float(_phi_inv(rhat[left_col]) - _phi_inv(rhat[right_col])) * scale
        else:
            gl = gr = float("nan")
        disks.append({
            "interval": (a_u, b_u),
            "columns": inside,
            "opening_class": opening,
            "closing_class": closing,
            "left_arc": dl * scale,
            "right_arc": dr * scale,
            "jump_time": s_jump,
            "grid_left_arc": gl,
            "grid_right_arc": gr,
        })

    # adjacency: disk j's closing point glues to disk k's opening point when a
    # horizontal chord below the bottom graph (or above the top graph)
    # connects them; evaluated with one-cell tolerance so it is stable under
    # refinement for generic contours
    adjacency = []
    s_row = rows[1] - rows[0] if adjacency_tol is None else float(adjacency_tol)
    for j1 in range(len(disks)):
        rc = _nearest_regular(col_index[j1][-1] + 1, +1)
        if rc < 0:
            continue
        for j2 in range(j1 + 1, len(disks)):
            lc = _nearest_regular(col_index[j2][0] - 1, -1)
            if lc < 0 or lc < rc:
                continue
            ways = []
            lo, hi = bottom[rc], bottom[lc]
            if abs(lo - hi) <= s_row and bottom[rc:lc + 1].min() >= min(lo, hi) - s_row:
                ways.append("below")
            lo_t, hi_t = top[rc], top[lc]
            if abs(lo_t - hi_t) <= s_row and top[rc:lc + 1].max() <= max(lo_t, hi_t) + s_row:
                ways.append("above")
            if ways:
                adjacency.append((j1, j2, tuple(ways)))

    labels_out = labels.copy()
    labels_out[in_strip] = -1
    return GluedMap(n=n, labels=labels_out, cols=cols, rows=rows, bottom=bottom,
                    top=top, strip_col=strip_col, disks=disks, chords=chords,
                    contour=cp, meta={"adjacency": adjacency, "in_strip": in_strip,
                                      "between": between})


def extract_disks(glued: GluedMap) -> list:
    """Disk table ordered by position along the compactified time axis."""
    out = []
    for d in sorted(glued.disks, key=lambda d: d["interval"][0]):
        out.append({
            "interval": d["interval"],
            "opening_class": d["opening_class"],
            "closing_class": d["closing_class"],
            "left_arc": d["left_arc"],
            "right_arc": d["right_arc"],
            "jump_time": d["jump_time"],
        })
    return out


def _euler_characteristic(mask: np.ndarray) -> int:
    v = int(mask.sum())
    e = int((mask[:-1] & mask[1:]).sum() + (mask[:, :-1] & mask[:, 1:]).sum())
    f = int((mask[:-1, :-1] & mask[1:, :-1] & mask[:-1, 1:] & mask[1:, 1:]).sum())
    return v - e + f


def verify_topology(glued: GluedMap, chords=None) -> dict:
    """Combinatorial consequences of the quotient being a glued half-plane.

    Checks: (i) the quotient graph is connected, (ii) every disk region is
    simply connected on the grid (Euler characteristic one), (iii) the
    curve along the top graph visits every disk's opening and closing
    class, and (iv) no recorded chord touches a jump strip.  Returns a
    structured report; any failure lists the offender.
    """
    n = glued.n
    in_strip = glued.meta["in_strip"]
    labels = glued.labels
    chords = glued.chords if chords is None else chords

    # (i) connectivity of the quotient: classes linked by grid adjacency,
    # counted over the classes actually present (strips are excised)
    flat = labels.copy()
    flat[in_strip] = -1
    present = np.unique(flat[flat >= 0])
    n_cls = int(flat.max()) + 1
    pair_i, pair_j = [], []
    for du, dv in ((1, 0), (0, 1)):
        a = flat[: n - du, : n - dv]
        b = flat[du:, dv:]
        ok = (a >= 0) & (b >= 0)
        pair_i.append(a[ok])
        pair_j.append(b[ok])
    gi = np.concatenate(pair_i)
    gj = np.concatenate(pair_j)
    g = sparse.coo_matrix((np.ones(gi.size, dtype=np.int8), (gi, gj)),
                          shape=(n_cls, n_cls))
    _, comp = connected_components(g, directed=False)
    n_comp = int(np.unique(comp[present]).size)
    connected = n_comp == 1

    # (ii) Euler characteristic of each disk's grid region
    euler_fail = []
    for j, d in enumerate(glued.disks):
        cols = d["columns"]
        mask = np.zeros_like(in_strip)
        mask[cols] = glued.meta["between"][cols]
        chi = _euler_characteristic(mask)
        if chi != 1:
            euler_fail.append((j, chi))

    # (iii) the Peano curve (top graph) meets each disk's marked classes
    peano_fail = []
    for j, d in enumerate(glued.disks):
        if d["opening_class"] < 0 or d["closing_class"] < 0:
            peano_fail.append((j, "missing endpoint class"))
        elif d["opening_class"] == d["closing_class"]:
            if d["left_arc"] + d["right_arc"] > 4.0 * float(np.max(np.abs(np.diff(glued.top)))):
                peano_fail.append((j, "opening equals closing"))

    # (iv) no chord touches a strip node
    strip_flat = np.nonzero(in_strip.ravel())[0]
    strip_set = set(int(s) for s in strip_flat)
    crossing = []
    for kind, a, b in chords:
        bad = [int(x) for x in np.concatenate([a, b]) if int(x) in strip_set]
        if bad:
            crossing.append((kind, bad[:5]))

    ok = connected and not euler_fail and not peano_fail and not crossing
    return {
        "pass": bool(ok),
        "connected": bool(connected),
        "n_quotient_components": int(n_comp),
        "euler_failures": euler_fail,
        "peano_failures": peano_fail,
        "chord_crossings": crossing,
        "n_disks": len(glued.disks),
    }
