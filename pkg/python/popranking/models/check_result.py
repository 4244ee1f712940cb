from __future__ import annotations

from dataclasses import dataclass


@dataclass
class CheckResult:
    """One entry of a verification report."""

    name: str
    passed: bool
    observed: object = None
    expected: object = None
    tolerance: float | None = None
    skipped: bool = False
    note: str = ""

    @property
    def status(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"

    @staticmethod
    def close(
        name: str,
        observed: float,
        expected: float,
        tolerance: float,
        note: str = "",
    ) -> CheckResult:
        return CheckResult(
            name=name,
            passed=bool(abs(observed - expected) <= tolerance),
            observed=observed,
            expected=expected,
            tolerance=tolerance,
            note=note,
        )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "observed": self.observed,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "note": self.note,
        }

    def __str__(self):
        text = f"[{self.status}] {self.name}: observed={self.observed!r}"
        if self.expected is not None:
            text += f" expected={self.expected!r}"
        if self.tolerance is not None:
            text += f" tol={self.tolerance:g}"
        if self.note:
            text += f" ({self.note})"
        return text
