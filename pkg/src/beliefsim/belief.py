"""Semantic-map belief states and the observation resolver.

A belief is an immutable snapshot. Every operation returns a new value and
bumps ``revision``; the input is never touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DuplicateId, Overfull, ShapeError, UnknownClass, UnknownId

Position = tuple[float, float, float]

_FORBIDDEN = ("\t", "\n", "\r")


def _as_position(values: Sequence[float]) -> Position:
    if len(values) != 3:
        raise ValueError(f"position needs 3 components, got {len(values)}")
    p = (float(values[0]), float(values[1]), float(values[2]))
    if not all(math.isfinite(v) for v in p):
        raise ValueError(f"non-finite position {p}")
    return p


def _check_label(kind: str, text: str) -> None:
    if not isinstance(text, str) or not text or text != text.strip():
        raise ValueError(f"{kind} must be non-empty text without surrounding spaces: {text!r}")
    if any(ch in text for ch in _FORBIDDEN):
        raise ValueError(f"{kind} may not contain tabs or newlines: {text!r}")


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    cls: str
    position: Position

    def __post_init__(self) -> None:
        _check_label("object id", self.id)
        _check_label("object class", self.cls)
        object.__setattr__(self, "position", _as_position(self.position))


@dataclass(frozen=True)
class Detection:
    cls: str
    position: Position

    def __post_init__(self) -> None:
        _check_label("object class", self.cls)
        object.__setattr__(self, "position", _as_position(self.position))


@dataclass(frozen=True)
class ObservationBatch:
    detections: tuple[Detection, ...] = ()
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "detections", tuple(self.detections))
        if not (math.isfinite(self.timestamp) and self.timestamp >= 0.0):
            raise ValueError("timestamp must be finite and non-negative")

    def __len__(self) -> int:
        return len(self.detections)


@dataclass(frozen=True)
class AssignmentRecord:
    """Resolver output for one class. ``pairs`` holds
    ``(detection index, instance id, distance)``."""

    cls: str
    pairs: tuple[tuple[int, str, float], ...]
    total_cost: float


@dataclass(frozen=True)
class BeliefState:
    instances: tuple[ObjectInstance, ...] = ()
    revision: int = 0
    timestamp: float = 0.0
    _by_id: dict = field(default=None, init=False, repr=False, compare=False)
    _by_class: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        instances = tuple(self.instances)
        object.__setattr__(self, "instances", instances)
        by_id: dict[str, ObjectInstance] = {}
        by_class: dict[str, list[ObjectInstance]] = {}
        for inst in instances:
            if inst.id in by_id:
                raise DuplicateId(f"duplicate object id {inst.id!r}")
            by_id[inst.id] = inst
            by_class.setdefault(inst.cls, []).append(inst)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_by_class", {c: tuple(v) for c, v in by_class.items()})

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def __contains__(self, object_id: str) -> bool:
        return object_id in self._by_id

    def get(self, object_id: str) -> ObjectInstance:
        try:
            return self._by_id[object_id]
        except KeyError:
            raise UnknownId(f"unknown object id {object_id!r}") from None

    def classes(self) -> list[str]:
        return sorted(self._by_class)

    def by_class(self, cls: str) -> tuple[ObjectInstance, ...]:
        return self._by_class.get(cls, ())

    def class_counts(self) -> dict[str, int]:
        return {c: len(v) for c, v in sorted(self._by_class.items())}

    def positions(self) -> dict[str, Position]:
        return {o.id: o.position for o in self.instances}


def init_belief(initial: Iterable[ObjectInstance], timestamp: float = 0.0) -> BeliefState:
    return BeliefState(tuple(initial), revision=0, timestamp=timestamp)


def min_cost_assignment(cost) -> tuple[list[int], float]:
    """Injective row->column assignment of minimum total cost.

    Among optimal assignments the lexicographically smallest column sequence
    (by row) wins. Returns ``(columns, total)`` with the total summed in row
    order.
    """
    a = np.asarray(cost, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError("cost must be a 2D matrix")
    n, m = a.shape
    if n > m:
        raise ShapeError(f"{n} rows cannot be assigned to {m} columns")
    if n == 0:
        return [], 0.0
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError("costs must be finite and non-negative")

    def _optimum(sub: np.ndarray) -> float:
        if sub.shape[0] == 0:
            return 0.0
        cols = kernels.solve_assignment(sub)
        return sum(float(sub[i, c]) for i, c in enumerate(cols))

    best = _optimum(a)
    tol = 1e-9 * max(1.0, best)
    free = list(range(m))
    chosen: list[int] = []
    fixed = 0.0
    for i in range(n):
        for pos, j in enumerate(free):
            rest = free[:pos] + free[pos + 1:]
            rest_opt = _optimum(a[i + 1:, rest]) if i + 1 < n else 0.0
            if fixed + a[i, j] + rest_opt <= best + tol:
                chosen.append(j)
                fixed += float(a[i, j])
                free = rest
                break
        else:  # pragma: no cover - tolerance guarantees a candidate
            raise RuntimeError("assignment search found no optimal column")
    total = 0.0
    for i, j in enumerate(chosen):
        total += float(a[i, j])
    return chosen, total


def resolve_update(belief: BeliefState, obs: ObservationBatch) -> tuple[BeliefState, list[AssignmentRecord]]:
    """Move believed instances onto the detections that best explain them.

    Per class, detections are assigned to distinct believed instances with
    minimal summed 3D distance; assigned instances take the detected
    positions. Detections are put in a canonical order first, so the result
    depends only on the multiset of detections.
    """
    grouped: dict[str, list[tuple[int, Detection]]] = {}
    for k, det in enumerate(obs.detections):
        grouped.setdefault(det.cls, []).append((k, det))

    for cls, dets in grouped.items():
        have = len(belief.by_class(cls))
        if have == 0:
            raise UnknownClass(f"detected class {cls!r} has no believed instances")
        if len(dets) > have:
            raise Overfull(f"{len(dets)} detections of {cls!r} but only {have} believed instances")

    moved: dict[str, Position] = {}
    records: list[AssignmentRecord] = []
    for cls in sorted(grouped):
        dets = sorted(grouped[cls], key=lambda kd: (kd[1].position, kd[0]))
        insts = belief.by_class(cls)
        cost = np.array([[math.dist(d.position, o.position) for o in insts] for _, d in dets])
        cols, total = min_cost_assignment(cost)
        pairs = []
        for row, col in enumerate(cols):
            k, det = dets[row]
            inst = insts[col]
            moved[inst.id] = det.position
            pairs.append((k, inst.id, float(cost[row, col])))
        records.append(AssignmentRecord(cls, tuple(pairs), total))

    instances = tuple(
        replace(o, position=moved[o.id]) if o.id in moved else o for o in belief.instances
    )
    return BeliefState(instances, belief.revision + 1, obs.timestamp), records


def add_object(belief: BeliefState, instance: ObjectInstance) -> BeliefState:
    if instance.id in belief:
        raise DuplicateId(f"duplicate object id {instance.id!r}")
    return BeliefState(belief.instances + (instance,), belief.revision + 1, belief.timestamp)


def remove_object(belief: BeliefState, object_id: str) -> BeliefState:
    if object_id not in belief:
        raise UnknownId(f"unknown object id {object_id!r}")
    kept = tuple(o for o in belief.instances if o.id != object_id)
    return BeliefState(kept, belief.revision + 1, belief.timestamp)


# -- text dumps -------------------------------------------------------------

DUMP_MAGIC = "# beliefsim belief-state v1"


def dump_belief(belief: BeliefState) -> str:
    lines = [
        DUMP_MAGIC,
        f"revision\t{belief.revision}",
        f"timestamp\t{belief.timestamp:.6f}",
        f"instances\t{len(belief)}",
    ]
    for o in belief.instances:
        x, y, z = o.position
        lines.append(f"{o.id}\t{o.cls}\t{x:.6f}\t{y:.6f}\t{z:.6f}")
    return "\n".join(lines) + "\n"


def load_belief(text: str) -> BeliefState:
    lines = text.splitlines()
    if not lines or lines[0].strip() != DUMP_MAGIC:
        raise ValueError("not a belief-state dump (missing header line)")
    header: dict[str, str] = {}
    body_start = 1
    for key in ("revision", "timestamp", "instances"):
        parts = lines[body_start].split("\t") if body_start < len(lines) else []
        if len(parts) != 2 or parts[0] != key:
            raise ValueError(f"line {body_start + 1}: expected '{key}<TAB>value'")
        header[key] = parts[1]
        body_start += 1
    count = int(header["instances"])
    rows = [ln for ln in lines[body_start:] if ln.strip()]
    if len(rows) != count:
        raise ValueError(f"header announces {count} instances, found {len(rows)}")
    instances = []
    for n, row in enumerate(rows, start=body_start + 1):
        parts = row.split("\t")
        if len(parts) != 5:
            raise ValueError(f"line {n}: expected 5 tab-separated fields")
        instances.append(ObjectInstance(parts[0], parts[1], tuple(float(v) for v in parts[2:])))
    return BeliefState(tuple(instances), int(header["revision"]), float(header["timestamp"]))
