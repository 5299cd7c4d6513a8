"""Inequality-check reports with a stable JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


@dataclass
class PointRecord:
    """One checked inequality ``lhs <= rhs`` (margin ``rhs - lhs``)."""

    location: tuple
    lhs: float
    rhs: float
    margin: float
    verdict: bool
    label: str = ""


@dataclass
class VerificationReport:
    test_name: str
    points: list[PointRecord]
    tolerance: float
    passed: bool
    notes: list[str] = field(default_factory=list)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_points(cls, test_name: str, points: list[PointRecord], tolerance: float,
                    notes: Optional[list[str]] = None, diagnostics: Optional[dict] = None) -> "VerificationReport":
        notes = list(notes or [])
        if not points:
            notes.append("vacuous pass: no test points")
        return cls(test_name, points, tolerance, all(p.verdict for p in points), notes, dict(diagnostics or {}))

    @property
    def failures(self) -> list[PointRecord]:
        return [p for p in self.points if not p.verdict]

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.test_name}: {len(self.points) - len(self.failures)}/{len(self.points)} points, tol={self.tolerance:.3g}"

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "pass": self.passed,
            "tolerance": _num(self.tolerance),
            "notes": list(self.notes),
            "points": [
                {
                    "location": [_num(v) for v in _flat(p.location)],
                    "lhs": _num(p.lhs),
                    "rhs": _num(p.rhs),
                    "margin": _num(p.margin),
                    "verdict": "pass" if p.verdict else "fail",
                    "label": p.label,
                }
                for p in self.points
            ],
            "diagnostics": _jsonable(self.diagnostics),
        }


def le_record(location, lhs: float, rhs: float, tolerance: float, label: str = "") -> PointRecord:
    """Record for ``lhs <= rhs`` checked within ``tolerance``."""
    margin = rhs - lhs
    ok = bool(margin >= -tolerance) if not math.isnan(margin) else False
    if math.isinf(lhs) and lhs < 0:
        ok = True
    if math.isinf(rhs) and rhs > 0:
        ok = True
    return PointRecord(tuple(_flat(location)), float(lhs), float(rhs), float(margin), ok, label)


def reports_to_json(reports: list[VerificationReport]) -> str:
    payload = {"reports": [r.to_dict() for r in reports], "pass": all(r.passed for r in reports)}
    return json.dumps(payload, indent=2, sort_keys=True)


def _flat(loc) -> list:
    out = []
    for v in loc if isinstance(loc, (tuple, list)) else [loc]:
        if isinstance(v, (list, tuple, np.ndarray)):
            out.extend(float(w) for w in np.ravel(v))
        else:
            out.append(float(v))
    return out


def _num(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj
