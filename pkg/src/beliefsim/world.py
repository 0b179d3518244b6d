"""Ground-truth household simulation.

Holds the floorplan, the true object positions, scripted agents and the
event timeline, and produces the detections each agent would make.
Stepping is a pure function: ``step(world, dt)`` returns a new world.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .belief import BeliefState, Detection, ObservationBatch
from .errors import EventTargetsWall, NoPath, UnknownId, ValidationError
from .geometry import (
    FovParams,
    GridMap,
    Pose,
    astar,
    in_fov,
    line_of_sight,
    normalize_angle,
    visible_objects,
    world_to_cell,
)

log = logging.getLogger(__name__)

DEFAULT_DT = 0.5
DEFAULT_HUMAN_SPEED = 1.0
DEFAULT_TRAIL_DISTANCE = 1.5

_EPS = 1e-12

# Independent RNG streams, one per consumer.
STREAM_ROBOT_OBJECTS = 1
STREAM_PERSON = 2
STREAM_SHUFFLE = 3
STREAM_HUMAN_OBJECTS = 4


def make_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream)])


# -- agent scripts ----------------------------------------------------------

@dataclass(frozen=True)
class Goto:
    x: float
    y: float


@dataclass(frozen=True)
class Wait:
    seconds: float


@dataclass(frozen=True)
class Follow:
    """Trail another agent, stopping ``distance`` meters of path short of it."""

    target: str
    distance: float = DEFAULT_TRAIL_DISTANCE


Directive = Union[Goto, Wait, Follow]


@dataclass(frozen=True)
class AgentState:
    name: str
    pose: Pose
    fov: FovParams = field(default_factory=FovParams)
    speed: float = DEFAULT_HUMAN_SPEED
    script: tuple[Directive, ...] = ()
    cursor: int = 0
    present: bool = True
    wait_left: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "script", tuple(self.script))
        if not self.speed > 0:
            raise ValueError(f"agent {self.name!r}: speed must be positive")
        if not 0 <= self.cursor <= len(self.script):
            raise ValueError(f"agent {self.name!r}: cursor outside script")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.pose.position[0], self.pose.position[1])


# -- timeline ---------------------------------------------------------------

@dataclass(frozen=True)
class Relocate:
    object_id: str
    position: tuple[float, float, float]


@dataclass(frozen=True)
class SetPresent:
    agent: str
    present: bool


@dataclass(frozen=True)
class WaypointInject:
    agent: str
    position: tuple[float, float]


@dataclass(frozen=True)
class Shuffle:
    """Expands into relocate events when it fires."""

    seed: Union[int, tuple[int, ...]]
    fraction: float


EventKind = Union[Relocate, SetPresent, WaypointInject, Shuffle]


@dataclass(frozen=True)
class TimelineEvent:
    at: float
    kind: EventKind


@dataclass(frozen=True)
class PerceptionNoise:
    sigma_pos: float = 0.0
    sigma_heading: float = 0.0
    p_drop_object: float = 0.0
    p_drop_person: float = 0.0

    def __post_init__(self) -> None:
        if self.sigma_pos < 0 or self.sigma_heading < 0:
            raise ValueError("noise sigmas must be non-negative")
        for p in (self.p_drop_object, self.p_drop_person):
            if not 0.0 <= p <= 1.0:
                raise ValueError("drop probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class WorldState:
    grid: GridMap
    truth: BeliefState
    agents: tuple[AgentState, ...]
    clock: float = 0.0
    frame: int = 0
    rng_seed: int = 0
    events: tuple[TimelineEvent, ...] = ()
    next_event: int = 0
    last_fired: tuple[TimelineEvent, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.next_event == 0:
            # stable: equal timestamps keep declaration order
            object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.at)))
        for agent in self.agents:
            if not self.grid.is_free(_cell_or_none(agent.xy, self.grid)):
                raise ValidationError(f"agent {agent.name!r} is not on a FREE cell")
        for obj in self.truth:
            if not self.grid.is_free(_cell_or_none(obj.position, self.grid)):
                raise ValidationError(f"object {obj.id!r} is not on a FREE cell")

    def agent(self, name: str) -> AgentState:
        for a in self.agents:
            if a.name == name:
                return a
        raise UnknownId(f"no agent named {name!r}")


def _cell_or_none(point, grid: GridMap):
    if not grid.contains_point(point):
        return (-1, -1)
    return world_to_cell(point, grid)


# -- stepping ---------------------------------------------------------------

def step(world: WorldState, dt: float = DEFAULT_DT) -> WorldState:
    """Advance one fixed timestep: fire due events, then move present agents."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    clock = world.clock + dt
    truth = world.truth
    agents = list(world.agents)
    fired: list[TimelineEvent] = []
    k = world.next_event
    while k < len(world.events) and world.events[k].at <= clock + _EPS:
        ev = world.events[k]
        k += 1
        if isinstance(ev.kind, Shuffle):
            snapshot = replace(world, truth=truth, agents=tuple(agents), clock=ev.at)
            expanded = shuffle_objects(snapshot, ev.kind.seed, ev.kind.fraction)
        else:
            expanded = [ev]
        for sub in expanded:
            truth, agents = _apply_event(world.grid, truth, agents, sub)
            fired.append(sub)

    by_name = {a.name: i for i, a in enumerate(agents)}
    for i, agent in enumerate(agents):
        if agent.present:
            agents[i] = _advance(agent, agents, by_name, world.grid, dt)

    return replace(
        world,
        truth=truth,
        agents=tuple(agents),
        clock=clock,
        frame=world.frame + 1,
        next_event=k,
        last_fired=tuple(fired),
    )


def _apply_event(grid: GridMap, truth: BeliefState, agents: list[AgentState], ev: TimelineEvent):
    kind = ev.kind
    if isinstance(kind, Relocate):
        if kind.object_id not in truth:
            raise UnknownId(f"relocate targets unknown object {kind.object_id!r}")
        if not grid.is_free(_cell_or_none(kind.position, grid)):
            raise EventTargetsWall(f"relocation of {kind.object_id!r} to {kind.position} targets a WALL cell")
        instances = tuple(
            replace(o, position=kind.position) if o.id == kind.object_id else o for o in truth.instances
        )
        return BeliefState(instances, truth.revision + 1, ev.at), agents
    agents = list(agents)
    for i, a in enumerate(agents):
        if a.name != getattr(kind, "agent", None):
            continue
        if isinstance(kind, SetPresent):
            agents[i] = replace(a, present=kind.present)
        elif isinstance(kind, WaypointInject):
            if not grid.is_free(_cell_or_none(kind.position, grid)):
                raise EventTargetsWall(f"waypoint for {a.name!r} at {kind.position} targets a WALL cell")
            script = a.script[: a.cursor] + (Goto(*kind.position),) + a.script[a.cursor:]
            agents[i] = replace(a, script=script, wait_left=None)
        return truth, agents
    raise UnknownId(f"event targets unknown agent {getattr(kind, 'agent', None)!r}")


def _polyline(grid: GridMap, start: tuple[float, float], goal: tuple[float, float]) -> list[tuple[float, float]]:
    """Waypoints from ``start`` to ``goal`` through the A* cell centers."""
    path = astar(grid, world_to_cell(start, grid), world_to_cell(goal, grid))
    return [grid.cell_center(c) for c in path.cells[1:-1]] + [goal]


def _walk(grid: GridMap, pos, goal, budget: float, stop_short: float = 0.0):
    """Move along the path toward ``goal`` by at most ``budget`` meters.

    Returns ``(position, distance moved, arrived, heading or None)``.
    """
    points = _polyline(grid, pos, goal)
    segs = []
    prev = pos
    for p in points:
        segs.append((prev, p, math.dist(prev, p)))
        prev = p
    length = sum(s[2] for s in segs)
    travel = min(budget, max(0.0, length - stop_short))
    arrived = stop_short == 0.0 and travel >= length - _EPS
    heading = None
    moved = 0.0
    cur = pos
    for a, b, d in segs:
        if d <= 0.0:
            continue
        if moved + d <= travel + _EPS:
            cur = b
            moved += d
            heading = math.atan2(b[1] - a[1], b[0] - a[0])
            continue
        frac = (travel - moved) / d
        if frac > 0.0:
            cur = (a[0] + (b[0] - a[0]) * frac, a[1] + (b[1] - a[1]) * frac)
            heading = math.atan2(b[1] - a[1], b[0] - a[0])
            moved = travel
        break
    if arrived:
        cur = (goal[0], goal[1])
    return cur, moved, arrived, heading


def _advance(agent: AgentState, agents: list[AgentState], by_name: dict, grid: GridMap, dt: float) -> AgentState:
    time_left = dt
    pos = agent.xy
    heading = agent.pose.heading
    cursor = agent.cursor
    wait_left = agent.wait_left
    script = agent.script
    for _ in range(4 * len(script) + 4):
        if time_left <= _EPS or cursor >= len(script):
            break
        d = script[cursor]
        if isinstance(d, Wait):
            remaining = d.seconds if wait_left is None else wait_left
            if remaining <= time_left + _EPS:
                time_left -= remaining
                cursor += 1
                wait_left = None
            else:
                wait_left = remaining - time_left
                time_left = 0.0
        elif isinstance(d, Goto):
            pos, moved, arrived, h = _walk(grid, pos, (d.x, d.y), agent.speed * time_left)
            if h is not None:
                heading = h
            if arrived:
                time_left -= moved / agent.speed
                cursor += 1
            else:
                time_left = 0.0
        elif isinstance(d, Follow):
            idx = by_name.get(d.target)
            target = agents[idx] if idx is not None else None
            if target is not None and target.present:
                try:
                    pos, _, _, h = _walk(grid, pos, target.xy, agent.speed * time_left, d.distance)
                except NoPath:
                    log.debug("agent %s cannot reach %s", agent.name, d.target)
                    h = None
                if h is not None:
                    heading = h
                elif math.dist(pos, target.xy) > 0.0:
                    heading = math.atan2(target.xy[1] - pos[1], target.xy[0] - pos[0])
            time_left = 0.0
    position = (pos[0], pos[1], agent.pose.position[2])
    return replace(agent, pose=Pose(position, normalize_angle(heading)), cursor=cursor, wait_left=wait_left)


# -- perception -------------------------------------------------------------

def sense_objects(world: WorldState, observer: AgentState, noise: PerceptionNoise, rng: np.random.Generator) -> ObservationBatch:
    """Detections of the true objects the observer can see.

    One uniform and two normals are drawn per visible object whatever the
    knob values, so changing one knob leaves the other draws untouched.
    """
    detections = []
    for obj in visible_objects(world.grid, observer.pose, observer.fov, world.truth.instances):
        u = rng.random()
        nx, ny = rng.normal(0.0, 1.0, size=2)
        if u < noise.p_drop_object:
            continue
        x, y, z = obj.position
        detections.append(Detection(obj.cls, (x + noise.sigma_pos * nx, y + noise.sigma_pos * ny, z)))
    return ObservationBatch(tuple(detections), world.clock)


def sense_person(
    world: WorldState,
    robot: AgentState,
    noise: PerceptionNoise,
    rng: np.random.Generator,
    person: str = "human",
) -> Optional[Pose]:
    u = rng.random()
    n = rng.normal(0.0, 1.0)
    try:
        human = world.agent(person)
    except UnknownId:
        return None
    if not human.present:
        return None
    target = human.pose.position
    if not in_fov(robot.pose, robot.fov, target):
        return None
    if not line_of_sight(world.grid, robot.pose.position, target):
        return None
    if u < noise.p_drop_person:
        return None
    return Pose(target, human.pose.heading + noise.sigma_heading * n)


def shuffle_objects(world: WorldState, seed, fraction: float) -> list[TimelineEvent]:
    """Relocate ``floor(fraction * N)`` objects to random FREE cell centers."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    objects = world.truth.instances
    count = math.floor(fraction * len(objects) + 1e-9)
    if count == 0:
        return []
    free = world.grid.free_cells()
    chosen = rng.choice(len(objects), size=count, replace=False)
    events = []
    for k in chosen:
        obj = objects[int(k)]
        cx, cy = world.grid.cell_center(free[int(rng.integers(len(free)))])
        events.append(TimelineEvent(world.clock, Relocate(obj.id, (cx, cy, obj.position[2]))))
    return events

