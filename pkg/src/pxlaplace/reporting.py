"""Shared lightweight report containers."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["CheckEntry", "ValidationReport", "PASS", "FAIL", "INDETERMINATE"]

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class CheckEntry:
    name: str
    status: str  # PASS | FAIL | INDETERMINATE
    witness: str = ""


@dataclass
class ValidationReport:
    """Per-hypothesis pass/fail entries with optional witnesses.

    ``indeterminate`` is reserved for conditions involving limits that a
    finite check cannot decide.
    """

    entries: list = field(default_factory=list)

    def add(self, name: str, status: str, witness: str = ""):
        self.entries.append(CheckEntry(name, status, witness))

    def __getitem__(self, name: str) -> CheckEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(e.status != FAIL for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if e.status == FAIL]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "entries": [
                {"name": e.name, "status": e.status, "witness": e.witness}
                for e in self.entries
            ],
        }
