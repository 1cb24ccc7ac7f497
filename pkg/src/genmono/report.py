"""Violation records and per-check reports, with their JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class Violation:
    check: str
    n: int
    j: int
    lhs: float
    rhs: float
    margin: float


@dataclass
class DiagnosticReport:
    check: str
    verdict: str
    violations: list[Violation] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    extrema_counts: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_violations(cls, check, violations, params, extrema_counts=None, notes=None) -> DiagnosticReport:
        full = {"alpha": None, "beta": None, "lambda": None, "Q": None}
        full.update({k: (None if v is None else float(v)) for k, v in params.items()})
        return cls(
            check=check,
            verdict=FAIL if violations else PASS,
            violations=list(violations),
            params=full,
            extrema_counts=list(extrema_counts or []),
            notes=list(notes or []),
        )

    @classmethod
    def skipped(cls, check, reason, params=None) -> DiagnosticReport:
        rep = cls.from_violations(check, [], params or {}, notes=[reason])
        rep.verdict = SKIPPED
        return rep

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    @property
    def worst(self) -> Violation | None:
        return max(self.violations, key=lambda v: v.margin, default=None)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict,
            "violations": [
                {"check": v.check, "n": v.n, "j": v.j, "lhs": v.lhs, "rhs": v.rhs, "margin": v.margin}
                for v in self.violations
            ],
            "params": dict(self.params),
            "extrema_counts": list(self.extrema_counts),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> DiagnosticReport:
        return cls(
            check=d["check"],
            verdict=d["verdict"],
            violations=[
                Violation(v.get("check", d["check"]), int(v["n"]), int(v["j"]), float(v["lhs"]), float(v["rhs"]),
                          float(v["margin"]))
                for v in d["violations"]
            ],
            params=dict(d["params"]),
            extrema_counts=list(d.get("extrema_counts", [])),
            notes=list(d.get("notes", [])),
        )

    def summary(self) -> str:
        line = f"{self.check}: {self.verdict}"
        if self.violations:
            w = self.worst
            line += f" ({len(self.violations)} violations, worst margin {w.margin:.3e} at n={w.n}, j={w.j})"
        return line


def merge_reports(check: str, reports: list[DiagnosticReport]) -> DiagnosticReport:
    """Combine same-kind reports (e.g. one per path or per run) into one."""
    if not reports:
        return DiagnosticReport.from_violations(check, [], {})
    violations = [v for r in reports for v in r.violations]
    notes = [n for r in reports if r.violations for n in r.notes]
    rep = DiagnosticReport.from_violations(check, violations, {}, notes=notes)
    rep.params = dict(reports[0].params)
    if all(r.verdict == SKIPPED for r in reports):
        rep.verdict = SKIPPED
        rep.notes = reports[0].notes
    return rep


def dumps(reports: list[DiagnosticReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, allow_nan=False)


def loads(text: str) -> list[DiagnosticReport]:
    return [DiagnosticReport.from_dict(d) for d in json.loads(text)]


def schema() -> dict:
    return json.loads((Path(__file__).parent / "report_schema.json").read_text())


def value_tolerance(history, slack: float = 1e-12) -> float:
    return slack * max(1.0, float(np.max(np.abs(history.array()))))
