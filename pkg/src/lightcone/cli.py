"""Command-line orchestration: sampling runs, artifacts, and the verify runner.

Every run writes its declared artifacts plus a manifest (inputs, seed,
versions, wall time).  Artifacts are byte-identical for a fixed config and
seed; wall time lives only in the manifest.  Exit codes: 0 success, 1
verification failure, 2 invalid configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import bessel, gff, levy, loewner, lqg, mating, verify
from .config import ConfigError, RunConfig, load_config
from .randomness import stream
from .reports import emit_report

ENV_PREFIX = "LIGHTCONE_"


def _env_default(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper(), fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lightcone",
        description="Stochastic simulation of self-intersecting Loewner flows "
                    "on quantum-gravity wedges and their boundary processes.")
    parser.add_argument("--config", default=_env_default("config"),
                        help="key-value config file (INI sections per module)")
    parser.add_argument("--seed", type=int, default=_env_default("seed"),
                        help="master seed override")
    parser.add_argument("--out", default=_env_default("out"),
                        help="output directory override")
    parser.add_argument("--threads", type=int, default=_env_default("threads"),
                        help="worker pool size for suite runs")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("bessel", help="sample a Bessel path and serialize it")

    p_sle = sub.add_parser("sle", help="Loewner flow commands")
    sle_sub = p_sle.add_subparsers(dest="subcommand", required=True)
    sle_sub.add_parser("trace", help="sample a light-cone driving and trace the curve")

    p_gff = sub.add_parser("gff", help="free field commands")
    gff_sub = p_gff.add_subparsers(dest="subcommand", required=True)
    gff_sub.add_parser("sample", help="sample a strip field")

    p_wedge = sub.add_parser("wedge", help="quantum wedge commands")
    wedge_sub = p_wedge.add_subparsers(dest="subcommand", required=True)
    pw = wedge_sub.add_parser("sample", help="sample a thick or thin wedge")
    pw.add_argument("--flavor", choices=("thick", "thin"), default="thick")

    p_levy = sub.add_parser("levy", help="stable boundary process commands")
    levy_sub = p_levy.add_subparsers(dest="subcommand", required=True)
    levy_sub.add_parser("sample", help="sample the matched-jump stable pair")

    p_mate = sub.add_parser("mate", help="mating-of-trees commands")
    mate_sub = p_mate.add_subparsers(dest="subcommand", required=True)
    mate_sub.add_parser("build", help="build the glued quotient of a synthetic path")

    sub.add_parser("ledger", help="one boundary-ledger replica")

    p_verify = sub.add_parser("verify", help="run acceptance suites")
    p_verify.add_argument("suite", nargs="?", default="all",
                          help="suite name or 'all' (see --list)")
    p_verify.add_argument("--list", action="store_true", help="list suite names")
    p_verify.add_argument("--suite", dest="suite_flag", default=None,
                          help="alternative way to pass the suite name")
    return parser


def _manifest(out: Path, command: str, cfg: RunConfig, artifacts: list,
              wall: float, extra: dict | None = None) -> Path:
    import scipy
    payload = {
        "command": command,
        "seed": cfg.seed,
        "inputs": {"kappa": cfg.kappa, "rho": cfg.rho},
        "artifacts": [str(a) for a in artifacts],
        "versions": {"numpy": np.__version__, "scipy": scipy.__version__,
                     "lightcone": "0.1.0"},
        "wall_time_s": wall,
    }
    if extra:
        payload["inputs"].update(extra)
    path = out / f"manifest-{command.replace(' ', '-')}.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    return path


def cmd_bessel(cfg: RunConfig, out: Path) -> list:
    dt = cfg.value("bessel", "dt", float)
    T = cfg.value("bessel", "T", float)
    delta = 1.0 + 2.0 * (cfg.rho + 2.0) / cfg.kappa
    path = bessel.simulate_bes(max(delta, 0.1), 0.0, T, dt, stream(cfg.seed, 1),
                               scheme="exact")
    csv = out / "bessel.csv"
    binf = out / "bessel.bin"
    path.to_csv(csv)
    path.to_binary(binf)
    return [csv, binf, Path(str(binf) + ".json")]


def cmd_sle_trace(cfg: RunConfig, out: Path) -> list:
    dt = cfg.value("loewner", "dt", float)
    T = cfg.value("loewner", "T", float)
    stride = int(cfg.value("loewner", "trace_stride", float))
    drv = loewner.sample_forward_driving(cfg.kappa, cfg.rho, T, dt, stream(cfg.seed, 2))
    tr = loewner.trace_curve(drv, stride=stride)
    d_csv = out / "driving.csv"
    t_csv = out / "trace.csv"
    drv.to_csv(d_csv)
    tr.to_csv(t_csv)
    return [d_csv, t_csv]


def cmd_gff_sample(cfg: RunConfig, out: Path) -> list:
    M = cfg.value("gff", "M", float)
    nx = int(cfg.value("gff", "nx", float))
    ny = int(cfg.value("gff", "ny", float))
    trunc = tuple(int(v) for v in cfg.value("gff", "truncation", tuple))
    fld = gff.sample_strip_gff(M, nx, ny, trunc, stream(cfg.seed, 3))
    fld.meta["seed"] = cfg.seed
    binf = out / "field.bin"
    fld.to_binary(binf)
    return [binf, Path(str(binf) + ".json")]


def cmd_wedge_sample(cfg: RunConfig, out: Path, flavor: str) -> list:
    g = math.sqrt(cfg.kappa)
    if flavor == "thick":
        spec = lqg.WedgeSpec(gamma=g, weight=cfg.rho + 4.0)
        surf = lqg.sample_thick_wedge(spec, M=6.0, nx=257, ny=33, rng=stream(cfg.seed, 4))
        binf = out / "wedge-thick.bin"
        surf.field.to_binary(binf)
        return [binf, Path(str(binf) + ".json")]
    spec = lqg.WedgeSpec(gamma=g, weight=cfg.rho + 2.0)
    cutoff = cfg.value("lqg", "bead_cutoff", float)
    budget = cfg.value("lqg", "bead_budget", float) * (2.0 - spec.delta) / 10.0
    surf = lqg.sample_thin_wedge(spec, cutoff, budget, stream(cfg.seed, 4))
    index = {
        "weight": spec.weight,
        "gamma": spec.gamma,
        "cutoff": cutoff,
        "seed": cfg.seed,
        "beads": [
            {"maximum": b.maximum, "boundary_length": b.boundary_length,
             "length_bottom": b.length_bottom, "length_top": b.length_top,
             "area": None if math.isnan(b.area) else b.area,
             "field": f"bead-{i:04d}.bin"}
            for i, b in enumerate(surf.beads)
        ],
    }
    arts = []
    for i, b in enumerate(surf.beads):
        p = out / f"bead-{i:04d}.bin"
        b.field.to_binary(p)
        arts += [p, Path(str(p) + ".json")]
    idx = out / "wedge-thin-index.json"
    with open(idx, "w") as fh:
        json.dump(index, fh, indent=1, sort_keys=True)
    return [idx] + arts


def cmd_levy_sample(cfg: RunConfig, out: Path) -> list:
    p = levy.sample_lr_path(cfg.kappa, cfg.rho,
                            cfg.value("levy", "c_fit", float),
                            cfg.value("levy", "T", float),
                            cfg.value("levy", "t_min", float),
                            cfg.value("levy", "dt", float),
                            stream(cfg.seed, 5))
    jumps = out / "levy-jumps.csv"
    grid = out / "levy-grid.csv"
    p.jumps_to_csv(jumps)
    p.grid_to_csv(grid)
    return [jumps, grid]


def cmd_mate_build(cfg: RunConfig, out: Path) -> list:
    n_jumps = int(cfg.value("mating", "n_jumps", float))
    p = mating.synthetic_matched_path(n_jumps, stream(cfg.seed, 6))
    cp = mating.compactify_contours(p, resolution=int(cfg.value("mating", "resolution", float)))
    gm = mating.build_quotient(cp, n=int(cfg.value("mating", "grid_n", float)))
    js = out / "gluing.json"
    svg = out / "gluing.svg"
    gm.to_json(js)
    gm.to_svg(svg)
    return [js, svg]


def cmd_ledger(cfg: RunConfig, out: Path) -> list:
    from .coupling import _ledger_replica
    led = _ledger_replica(cfg.kappa, cfg.rho, cfg.seed, 0, 0.75, 1.5e-4,
                          checkpoints=[])
    payload = {
        "bubbles": [
            {k: (v.real if isinstance(v, complex) else v) if k in ("d_left", "d_right", "local_time", "start_time", "end_time")
             else str(v) for k, v in b.items()}
            for b in led.bubbles
        ],
        "meta": {k: str(v) for k, v in led.meta.items()},
    }
    js = out / "ledger.json"
    with open(js, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    return [js]


def cmd_verify(cfg: RunConfig, out: Path, suite: str) -> tuple[list, bool]:
    names = sorted(verify.SUITES) if suite == "all" else [suite]
    reports = verify.run_all(cfg, names)
    js = out / "verify-report.json"
    txt = out / "verify-report.txt"
    emit_report(reports, "json", js)
    emit_report(reports, "text", txt)
    ok = all(r.passed for r in reports)
    sys.stdout.write(emit_report(reports, "text") + "\n")
    return [js, txt], ok


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {}
    if args.seed is not None:
        overrides["run.seed"] = int(args.seed)
    if args.out is not None:
        overrides["run.out"] = args.out
    if args.threads is not None:
        overrides["run.threads"] = int(args.threads)
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    ok = True
    try:
        if args.command == "bessel":
            arts = cmd_bessel(cfg, out)
            label = "bessel"
        elif args.command == "sle":
            arts = cmd_sle_trace(cfg, out)
            label = "sle trace"
        elif args.command == "gff":
            arts = cmd_gff_sample(cfg, out)
            label = "gff sample"
        elif args.command == "wedge":
            arts = cmd_wedge_sample(cfg, out, args.flavor)
            label = "wedge sample"
        elif args.command == "levy":
            arts = cmd_levy_sample(cfg, out)
            label = "levy sample"
        elif args.command == "mate":
            arts = cmd_mate_build(cfg, out)
            label = "mate build"
        elif args.command == "ledger":
            arts = cmd_ledger(cfg, out)
            label = "ledger"
        elif args.command == "verify":
            if args.list:
                sys.stdout.write("\n".join(sorted(verify.SUITES)) + "\n")
                return 0
            suite = args.suite_flag or args.suite
            if suite != "all" and suite not in verify.SUITES:
                sys.stderr.write(f"unknown suite {suite!r}; available: "
                                 f"{', '.join(sorted(verify.SUITES))}\n")
                return 2
            arts, ok = cmd_verify(cfg, out, suite)
            label = "verify"
        else:
            parser.error(f"unhandled command {args.command}")
            return 2
    except (ConfigError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    _manifest(out, label, cfg, arts, time.time() - t0)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
