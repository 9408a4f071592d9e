"""Named numerical inequality checks and reports."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

REL_SLACK = 1e-9


class Relation(str, enum.Enum):
    LT = "LT"
    LE = "LE"
    GT = "GT"
    GE = "GE"


@dataclass(frozen=True)
class AuditCheck:
    """One evaluated inequality ``lhs <relation> rhs``.

    ``margin`` is signed, positive when the inequality holds with room
    to spare.  Strict relations are evaluated as non-strict with relative
    slack :data:`REL_SLACK`.  A vacuous check (zero against zero, or an
    empty index set) passes; a skipped check was not evaluated because
    its preconditions did not hold and carries the reason in ``note``.
    """

    name: str
    lhs: float
    rhs: float
    relation: Relation
    margin: float
    passed: bool
    vacuous: bool = False
    skipped: bool = False
    note: str = ""

    @property
    def evaluated(self) -> bool:
        return not (self.vacuous or self.skipped)

    @property
    def status(self) -> str:
        if self.skipped:
            return "skipped"
        if self.vacuous:
            return "vacuous"
        return "pass" if self.passed else "fail"


def compare(name, lhs, rhs, relation, scale=0.0, vacuous=False, note="") -> AuditCheck:
    """Build an :class:`AuditCheck`, applying the slack convention."""
    lhs, rhs = float(lhs), float(rhs)
    relation = Relation(relation)
    margin = rhs - lhs if relation in (Relation.LT, Relation.LE) else lhs - rhs
    tol = REL_SLACK * max(abs(lhs), abs(rhs), float(scale))
    if lhs == 0.0 and rhs == 0.0:
        vacuous = True
    passed = bool(vacuous or margin >= -tol)
    return AuditCheck(name, lhs, rhs, relation, margin, passed, vacuous=vacuous, note=note)


def skipped(name, relation, reason) -> AuditCheck:
    return AuditCheck(name, math.nan, math.nan, Relation(relation), math.nan, True,
                      skipped=True, note=reason)


@dataclass
class AuditReport:
    iteration: int
    checks: list[AuditCheck] = field(default_factory=list)
    instance_id: str = ""

    def add(self, check: AuditCheck):
        if any(c.name == check.name for c in self.checks):
            raise ValueError(f"check {check.name!r} already recorded for iteration {self.iteration}")
        self.checks.append(check)

    def extend(self, checks):
        for c in checks:
            self.add(c)

    def __getitem__(self, name) -> AuditCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name):
        return any(c.name == name for c in self.checks)

    @property
    def failures(self) -> list[AuditCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return not self.failures


def tally(reports):
    """Per-check-name counts of ``pass/fail/vacuous/skipped`` over reports."""
    out = {}
    for rep in reports:
        for c in rep.checks:
            row = out.setdefault(c.name, {"pass": 0, "fail": 0, "vacuous": 0, "skipped": 0})
            row[c.status] += 1
    return dict(sorted(out.items()))
