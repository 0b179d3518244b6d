"""Recursive theory of mind.

The robot keeps its own belief and an estimate of the person's belief. The
estimate is fed from the robot's belief, filtered through what the person
could have seen: at each sighting, and along the A* route since the
previous sighting.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

from .belief import BeliefState, Detection, ObservationBatch, resolve_update
from .errors import NoPath
from .geometry import FovParams, GridMap, GridPath, Pose, astar, visible_objects, world_to_cell

log = logging.getLogger(__name__)

ROBOT = "robot"
INFERRED = "inferred"


@dataclass(frozen=True)
class HistoryEntry:
    frame: int
    belief: str
    revision: int
    event: str


@dataclass(frozen=True)
class TomState:
    robot_belief: BeliefState
    inferred_human_belief: BeliefState
    last_seen: Optional[tuple[Pose, float]] = None
    history: tuple[HistoryEntry, ...] = ()
    frame: int = 0


@dataclass(frozen=True)
class InferredTraversal:
    path: GridPath
    per_cell_updates: tuple[int, ...]


def init_tom(initial: BeliefState) -> TomState:
    """Both beliefs start from the prior map."""
    return TomState(robot_belief=initial, inferred_human_belief=initial)


def _logged(tom: TomState, which: str, belief: BeliefState, event: str) -> tuple[HistoryEntry, ...]:
    return tom.history + (HistoryEntry(tom.frame, which, belief.revision, event),)


def update_robot_belief(tom: TomState, obs: ObservationBatch) -> TomState:
    belief, _ = resolve_update(tom.robot_belief, obs)
    history = _logged(tom, ROBOT, belief, f"observed {len(obs)} objects")
    return replace(tom, robot_belief=belief, history=history)


def infer_visible_from_belief(
    belief: BeliefState, observer: Pose, fov: FovParams, grid: GridMap, timestamp: float = 0.0
) -> ObservationBatch:
    """What ``observer`` would see if the world matched ``belief``."""
    seen = visible_objects(grid, observer, fov, belief.instances)
    return ObservationBatch(tuple(Detection(o.cls, o.position) for o in seen), timestamp)


def _transfer(tom: TomState, pose: Pose, t: float, grid: GridMap, fov: FovParams, event: str) -> tuple[TomState, int]:
    batch = infer_visible_from_belief(tom.robot_belief, pose, fov, grid, t)
    belief, _ = resolve_update(tom.inferred_human_belief, batch)
    history = _logged(tom, INFERRED, belief, f"{event}: {len(batch)} objects")
    return replace(tom, inferred_human_belief=belief, history=history), len(batch)


def on_person_sighting(
    tom: TomState,
    sighting: Pose,
    t: float,
    grid: GridMap,
    fov_human: FovParams,
    *,
    infer_trajectory: bool = True,
    continuity_gap: float = 0.0,
) -> tuple[TomState, Optional[InferredTraversal]]:
    """Fold one sighting of the person into the inferred belief.

    When the previous sighting is older than ``continuity_gap`` seconds and
    in another cell, the person is assumed to have walked the A* path
    between the two, looking along the direction of travel.
    """
    if tom.last_seen is not None and t < tom.last_seen[1]:
        raise ValueError("sightings must arrive in time order")
    traversal = None
    if infer_trajectory and tom.last_seen is not None and t - tom.last_seen[1] > continuity_gap:
        prev_pose, _ = tom.last_seen
        a = world_to_cell(prev_pose.position, grid)
        b = world_to_cell(sighting.position, grid)
        if a != b:
            try:
                path = astar(grid, a, b)
            except NoPath:
                log.info("no path between sightings %s -> %s; updating at sighting only", a, b)
            else:
                counts = []
                z = sighting.position[2]
                for i, cell in enumerate(path.cells):
                    cx, cy = grid.cell_center(cell)
                    if i + 1 < len(path.cells):
                        nx, ny = grid.cell_center(path.cells[i + 1])
                        heading = math.atan2(ny - cy, nx - cx)
                    else:
                        heading = sighting.heading
                    tom, n = _transfer(tom, Pose((cx, cy, z), heading), t, grid, fov_human, f"path cell {cell}")
                    counts.append(n)
                traversal = InferredTraversal(path, tuple(counts))
    tom, _ = _transfer(tom, sighting, t, grid, fov_human, "sighting")
    return replace(tom, last_seen=(sighting, t)), traversal


def full_step(
    tom: TomState,
    robot_obs: ObservationBatch,
    person: Optional[tuple[Pose, float]],
    grid: GridMap,
    fov_human: FovParams,
    *,
    frame: Optional[int] = None,
    infer_trajectory: bool = True,
    continuity_gap: float = 0.0,
) -> TomState:
    """Robot update first, so the person's view draws on the freshest map."""
    if frame is not None:
        tom = replace(tom, frame=frame)
    tom = update_robot_belief(tom, robot_obs)
    if person is not None:
        pose, t = person
        tom, _ = on_person_sighting(
            tom, pose, t, grid, fov_human,
            infer_trajectory=infer_trajectory, continuity_gap=continuity_gap,
        )
    return tom
