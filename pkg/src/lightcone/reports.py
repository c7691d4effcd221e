"""Structured pass/fail reports for the statistical verification suites."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Statistic", "TestReport", "emit_report"]


@dataclass
class Statistic:
    name: str
    observed: float
    expected: float
    tolerance: float           # absolute tolerance or SE-scaled bound
    passed: bool
    provenance: str            # which claim this exercises
    kind: str = "abs"          # "abs" | "p-value" | "bound"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "observed": None if self.observed is None or np.isnan(self.observed) else float(self.observed),
            "expected": None if self.expected is None or np.isnan(self.expected) else float(self.expected),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "provenance": self.provenance,
            "kind": self.kind,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"[{flag}] {self.name}: observed={self.observed:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g} ({self.provenance})")


def stat_close(name, observed, expected, tol, provenance) -> Statistic:
    return Statistic(name, float(observed), float(expected), float(tol),
                     bool(abs(observed - expected) <= tol), provenance)


def stat_pvalue(name, p, threshold, provenance, want_reject=False) -> Statistic:
    ok = (p < threshold) if want_reject else (p > threshold)
    return Statistic(name, float(p), float(threshold), float(threshold), bool(ok),
                     provenance, kind="p-value")


def stat_bound(name, observed, bound, provenance, below=True) -> Statistic:
    ok = observed <= bound if below else observed >= bound
    return Statistic(name, float(observed), float(bound), float(bound), bool(ok),
                     provenance, kind="bound")


@dataclass
class TestReport:
    suite: str
    params: dict
    statistics: list
    seed: int
    ensemble_sizes: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not self.statistics:
            raise ValueError("a report needs at least one statistic")

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.statistics)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "params": {k: (v if isinstance(v, (int, float, str, bool, type(None)))
                           else str(v)) for k, v in self.params.items()},
            "statistics": [s.to_dict() for s in self.statistics],
            "pass": self.passed,
            "seed": int(self.seed),
            "ensemble_sizes": self.ensemble_sizes,
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        head = f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} (seed {self.seed})"
        return "\n".join([head] + ["  " + s.line() for s in self.statistics])


def emit_report(reports, fmt: str = "json", path=None) -> str:
    """Merge reports into one artifact with a stable schema."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "json":
        payload = {
            "reports": [r.to_dict() for r in reports],
            "pass": all(r.passed for r in reports),
        }
        text = json.dumps(payload, indent=1, sort_keys=True)
    elif fmt == "text":
        lines = [r.to_text() for r in reports]
        lines.append(f"overall: {'PASS' if all(r.passed for r in reports) else 'FAIL'}")
        text = "\n".join(lines)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
