"""Uniform pass/fail records shared by the structural checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: Any = None
    margin: float | None = None
    checked: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "pass": self.passed, "checked": self.checked}
        out["witnesses"] = [] if self.witness is None else [self.witness]
        out["margins"] = {} if self.margin is None else {"max_residual": self.margin}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CheckReport:
    subject: str
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __bool__(self) -> bool:
        return self.passed

    def first_failure(self) -> CheckResult | None:
        return next((r for r in self.results if not r.passed), None)

    def result(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    def to_dict(self) -> dict:
        return {"subject": self.subject, "pass": self.passed,
                "checks": [r.to_dict() for r in self.results]}
