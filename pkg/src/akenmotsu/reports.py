"""Residual checks and their aggregation into serializable reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Check:
    name: str
    residual: float
    threshold: float
    note: str = ""
    # lower-bound checks pass when the value exceeds the threshold
    above: bool = False

    @property
    def passed(self) -> bool:
        if self.above:
            return bool(self.residual > self.threshold)
        return bool(np.isfinite(self.residual) and self.residual < self.threshold)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "residual": float(self.residual),
            "threshold": float(self.threshold),
            "passed": self.passed,
        }
        if self.above:
            out["bound"] = "lower"
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CheckReport:
    """A named group of checks plus derived quantities."""

    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(
        self, name: str, residual: float, threshold: float, note: str = "", above: bool = False
    ) -> Check:
        c = Check(name, float(residual), float(threshold), note, above)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def residual(self, name: str) -> float:
        return self[name].residual

    def summary(self) -> str:
        """One line per check, aligned for terminal output."""
        width = max((len(c.name) for c in self.checks), default=0)
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            rel = ">" if c.above else "<"
            mark = "ok" if c.passed else "FAIL"
            lines.append(f"  {c.name:<{width}}  {c.residual:.3e} {rel} {c.threshold:.1e}  {mark}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": to_jsonable(self.data),
        }


class ResidualTracker:
    """Running maxima of named residuals over sample points."""

    def __init__(self):
        self.values: dict = {}

    def update(self, name: str, value) -> None:
        v = float(np.max(np.abs(value))) if np.size(value) else 0.0
        if math.isnan(v):
            v = math.inf
        self.values[name] = max(self.values.get(name, 0.0), v)

    def __getitem__(self, name):
        return self.values[name]


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj
