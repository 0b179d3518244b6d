"""Summed minimum cost by class (SMCC) between two belief states."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .belief import BeliefState
from .errors import CardinalityMismatch

DEFAULT_PENALTY = 5.0


@dataclass(frozen=True)
class SmccReport:
    total: float
    per_class: dict[str, tuple[float, int]]
    object_count: int

    @property
    def mean(self) -> float:
        return self.total / self.object_count if self.object_count else 0.0


@dataclass(frozen=True)
class MeritTriple:
    inferred_vs_human: float
    human_vs_true: float
    robot_vs_true: float


def class_min_cost(a: list, b: list) -> float:
    """Minimum total L2 distance matching the smaller point list into the larger.

    Both lists are sorted and the role of rows is fixed by content, so the
    result does not depend on argument order.
    """
    a = sorted(tuple(p) for p in a)
    b = sorted(tuple(p) for p in b)
    if len(a) > len(b) or (len(a) == len(b) and b < a):
        a, b = b, a
    if not a:
        return 0.0
    cost = np.array([[math.dist(p, q) for q in b] for p in a])
    cols = kernels.solve_assignment(cost)
    total = 0.0
    for i, j in enumerate(cols):
        total += float(cost[i, j])
    return total


def smcc(a: BeliefState, b: BeliefState, *, strict: bool = True, penalty: float = DEFAULT_PENALTY) -> SmccReport:
    """Per-class assignment distance, summed.

    In strict mode every class must have equal counts in both states. With
    ``strict=False`` each unmatched object adds ``penalty`` meters instead.
    """
    per_class: dict[str, tuple[float, int]] = {}
    for cls in sorted(set(a.classes()) | set(b.classes())):
        pa = [o.position for o in a.by_class(cls)]
        pb = [o.position for o in b.by_class(cls)]
        if len(pa) != len(pb) and strict:
            raise CardinalityMismatch(f"class {cls!r}: {len(pa)} vs {len(pb)} instances")
        matched = min(len(pa), len(pb))
        cost = class_min_cost(pa, pb) + penalty * abs(len(pa) - len(pb))
        per_class[cls] = (cost, matched)
    total = 0.0
    for cost, _ in per_class.values():
        total += cost
    return SmccReport(total, per_class, len(a))


def figures_of_merit(inferred: BeliefState, human: BeliefState, robot: BeliefState, truth: BeliefState) -> MeritTriple:
    return MeritTriple(
        inferred_vs_human=smcc(inferred, human).mean,
        human_vs_true=smcc(human, truth).mean,
        robot_vs_true=smcc(robot, truth).mean,
    )


def format_report(report: SmccReport, per_class: bool = False) -> str:
    lines = [
        f"total\t{report.total:.6f}",
        f"mean\t{report.mean:.6f}",
        f"objects\t{report.object_count}",
    ]
    if per_class:
        lines.append("class\tcost\tmatched")
        for cls, (cost, matched) in report.per_class.items():
            lines.append(f"{cls}\t{cost:.6f}\t{matched}")
    return "\n".join(lines) + "\n"
