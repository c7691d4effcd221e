"""Run configuration: INI sections per module, validated at parse time.

Tolerances for every verification suite are pre-registered here; suites
read them from the config and never adjust them after seeing data.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

__all__ = ["RunConfig", "DEFAULT_CONFIG", "load_config", "ConfigError"]


class ConfigError(ValueError):
    """Invalid configuration; message carries section/field diagnostics."""


DEFAULT_CONFIG = """\
[run]
kappa = 3.0
rho = -2.2
seed = 20240
out = ./out
threads = 1

[bessel]
dt = 1e-4
T = 1.0
n_paths = 10000
eps_ladder = 0.1, 0.05, 0.025

[loewner]
dt = 2e-4
T = 1.0
trace_stride = 8

[gff]
M = 6.2832
nx = 257
ny = 65
truncation = 128, 48
n_samples = 2000

[lqg]
bead_cutoff = 1.0
bead_budget = 1500
bead_dt_rel = 2e-4

[levy]
c_fit = 1.0
T = 1.0
t_min = 1e-4
dt = 1e-3
n_paths = 400

[mating]
n_jumps = 20
resolution = 4096
grid_n = 512

[coupling]
rho_tilde = 1.8
tau = 0.25
dt = 2e-4
n_coupling = 2000
n_martingale = 4000
identity_dt = 2e-5
identity_ladder = 0.05, 0.02, 0.01
excursion_n = 500
excursion_dt = 2e-4
cut_wedge_n = 200
separation_T = 60.0

[tolerances]
kpz_match = 1e-12
ks_p = 0.01
scaling_ks_p = 0.01
zero_dim = 0.07
pv_cauchy_shrink = 0.30
slit_error_mult = 5.0
hydro_residual = 1e-3
capacity_rel = 0.05
split_ks_p = 0.01
chi2_p = 0.01
energy_p = 0.01
hill_alpha = 0.1
ladder_dim = 0.07
record_index_rel = 0.20
bead_exponent = 0.15
maxima_ratio_rel = 0.20
identity_gap = 0.05
excursion_p = 0.005
cut_exponent = 0.2
separation_p = 0.95
arc_tol_cells = 2
"""


def _floats(text: str) -> tuple:
    return tuple(float(tok.strip()) for tok in text.split(",") if tok.strip())


@dataclass
class RunConfig:
    kappa: float
    rho: float
    seed: int
    out: str
    threads: int
    sections: dict = field(default_factory=dict)

    def __post_init__(self):
        lo = max(self.kappa / 2.0 - 4.0, -2.0 - self.kappa / 2.0)
        if not (0.0 < self.kappa < 4.0 and lo < self.rho < -2.0):
            raise ConfigError(
                f"[run] kappa={self.kappa}, rho={self.rho}: rho must lie in the "
                f"light-cone window ({lo:.6g}, -2) with kappa in (0,4)")
        if self.threads < 1:
            raise ConfigError(f"[run] threads must be at least 1, got {self.threads}")

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def value(self, section: str, key: str, cast=float):
        sec = self.sections.get(section)
        key = key.lower()          # configparser lowercases option names
        if sec is None or key not in sec:
            raise ConfigError(f"[{section}] {key}: missing")
        raw = sec[key]
        try:
            if cast is tuple:
                return _floats(raw)
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}={raw!r}: {exc}") from exc

    def tolerance(self, key: str) -> float:
        return self.value("tolerances", key, float)


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Parse the key-value config; None loads the built-in defaults.

    ``overrides`` maps dotted keys ("run.seed") to replacement strings and
    is applied after parsing, so command-line flags and environment
    variables can supersede the file.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if overrides:
        for dotted, value in overrides.items():
            if "." not in dotted:
                raise ConfigError(f"override {dotted!r} must look like section.key")
            sec, key = dotted.split(".", 1)
            if not parser.has_section(sec):
                parser.add_section(sec)
            parser.set(sec, key, str(value))
    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    run = sections.get("run", {})
    try:
        cfg = RunConfig(
            kappa=float(run.get("kappa", 3.0)),
            rho=float(run.get("rho", -2.2)),
            seed=int(run.get("seed", 0)),
            out=run.get("out", "./out"),
            threads=int(run.get("threads", 1)),
            sections=sections,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[run] section: {exc}") from exc
    return cfg


def dump_default(path) -> None:
    with open(path, "w") as fh:
        fh.write(DEFAULT_CONFIG)
