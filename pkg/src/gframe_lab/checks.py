"""Measured checks and the audit records that collect them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Check:
    """One measured quantity judged against a tolerance.

    ``kind`` is "le" (pass when value <= tolerance) or "ge" (pass when
    value >= tolerance).  Checks with ``applicable=False`` are reported but
    do not decide the audit outcome.
    """

    name: str
    value: float
    tolerance: float
    kind: str = "le"
    applicable: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.kind == "le":
            return self.value <= self.tolerance
        return self.value >= self.tolerance


@dataclass
class AuditRecord:
    theorem: str
    checks: list[Check] = field(default_factory=list)
    verdicts: dict[str, bool] = field(default_factory=dict)
    seed: int | None = None
    notes: list[str] = field(default_factory=list)

    def add(self, name, value, tolerance, kind="le", applicable=True, note="") -> Check:
        c = Check(name, float(value), float(tolerance), kind, applicable, note)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.applicable and not c.passed]

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def random_unit_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` complex Gaussian vectors of length ``n``, normalized; shape (count, n)."""
    X = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def relative_gap(a: complex, b: complex, floor: float = 1e-300) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)
