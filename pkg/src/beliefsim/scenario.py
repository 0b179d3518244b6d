"""Scenario documents.

UTF-8, line oriented, sections headed by bracketed names. Lines starting
with ``;`` are comments. Example::

    [map]
    cell_size = 0.5
    origin = 0.0 0.0
    ######
    #....#
    ######

    [objects]
    cup_1 | cup | 1.25 0.75 0.9

    [agent human]
    start = 0.75 0.75 0.0 0.0
    speed = 1.0
    fov = 1.0471975511965976 8.0
    goto 2.25 0.75
    wait 1.0
    absent 0.0 2.0

    [agent robot]
    start = 0.75 0.75 0.0 0.0
    follow human 1.5

    [events]
    relocate 0.0 cup_1 2.25 0.75 0.9
    present 4.0 human false
    inject 4.0 robot 1.25 0.75
    shuffle 0.0 11 0.8

    [config]
    dt = 0.5
    duration = 10.0

Grid rows are lines made only of ``#`` (wall) and ``.`` (free); the first
row is the highest y. ``serialize`` emits a canonical form with every
config key spelled out and floats in shortest round-trip notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .belief import BeliefState, ObjectInstance
from .errors import ParseError, ValidationError
from .geometry import FovParams, GridMap, Pose, world_to_cell
from .world import (
    AgentState,
    Follow,
    Goto,
    Relocate,
    SetPresent,
    Shuffle,
    TimelineEvent,
    Wait,
    WaypointInject,
    WorldState,
)

HUMAN = "human"
ROBOT = "robot"


@dataclass(frozen=True)
class MapSpec:
    rows: tuple[str, ...]
    cell_size: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    def to_grid(self) -> GridMap:
        return GridMap.from_ascii(self.rows, self.cell_size, self.origin)


@dataclass(frozen=True)
class ObjectSpec:
    id: str
    cls: str
    position: tuple[float, float, float]


@dataclass(frozen=True)
class AgentSpec:
    name: str
    start: tuple[float, float, float, float]  # x y z heading
    speed: float = 1.0
    fov: tuple[float, float] = (math.pi / 3, 8.0)
    script: tuple[Union[Goto, Wait, Follow], ...] = ()
    absences: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class ShuffleSpec:
    at: float
    seed: int
    fraction: float


@dataclass(frozen=True)
class ScenarioConfig:
    dt: float = 0.5
    duration: float = 60.0
    seed: int = 0
    sigma_pos: float = 0.0
    sigma_heading: float = 0.0
    p_drop_object: float = 0.0
    p_drop_person: float = 0.0
    tau: float = 0.5
    trajectory_inference: bool = True
    human_perception: str = "ground_truth"
    assist_at: tuple[float, ...] = ()


HUMAN_PERCEPTION_MODES = ("ground_truth", "noisy")
_BOOL_KEYS = {"trajectory_inference"}
_INT_KEYS = {"seed"}
_STR_KEYS = {"human_perception"}
_TUPLE_KEYS = {"assist_at"}

EventSpec = Union[TimelineEvent, ShuffleSpec]


@dataclass(frozen=True)
class ScenarioDoc:
    map: MapSpec
    objects: tuple[ObjectSpec, ...] = ()
    agents: tuple[AgentSpec, ...] = ()
    events: tuple[EventSpec, ...] = ()
    config: ScenarioConfig = field(default_factory=ScenarioConfig)

    def agent(self, name: str) -> AgentSpec:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)


# -- parsing ----------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.text = text

    def fail(self, message: str, token: Optional[str] = None) -> ParseError:
        col = 1
        if token is not None:
            idx = self.text.find(token)
            col = idx + 1 if idx >= 0 else 1
        else:
            col = len(self.text) - len(self.text.lstrip()) + 1
        return ParseError(self.number, col, message)

    def floats(self, tokens: list[str], count: int, what: str) -> list[float]:
        if len(tokens) != count:
            raise self.fail(f"{what} needs {count} numbers, got {len(tokens)}")
        out = []
        for tok in tokens:
            try:
                v = float(tok)
            except ValueError:
                raise self.fail(f"{what}: {tok!r} is not a number", tok) from None
            if not math.isfinite(v):
                raise self.fail(f"{what}: {tok!r} is not finite", tok)
            out.append(v)
        return out


def _key_value(line: _Line) -> tuple[str, str]:
    if "=" not in line.text:
        raise line.fail("expected 'key = value'")
    key, value = line.text.split("=", 1)
    return key.strip(), value.strip()


def _parse_bool(line: _Line, tok: str, true=("on", "true", "yes", "1"), false=("off", "false", "no", "0")) -> bool:
    low = tok.lower()
    if low in true:
        return True
    if low in false:
        return False
    raise line.fail(f"expected a boolean, got {tok!r}", tok)


def parse_scenario(text: str) -> ScenarioDoc:
    """Parse and validate a scenario document."""
    sections: list[tuple[_Line, str, list[_Line]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith(";"):
            continue
        line = _Line(number, raw)
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise line.fail("unterminated section header")
            sections.append((line, stripped[1:-1].strip(), []))
            continue
        if not sections:
            raise line.fail("content before the first section header")
        sections[-1][2].append(line)

    map_spec = None
    objects: list[ObjectSpec] = []
    agents: list[AgentSpec] = []
    events: list[EventSpec] = []
    config = ScenarioConfig()
    seen: set[str] = set()
    for header, name, lines in sections:
        if name in seen and not name.startswith("agent "):
            raise header.fail(f"duplicate section [{name}]")
        seen.add(name)
        if name == "map":
            map_spec = _parse_map(header, lines)
        elif name == "objects":
            objects.extend(_parse_object(ln) for ln in lines)
        elif name.startswith("agent "):
            agent_name = name[len("agent "):].strip()
            if not agent_name or any(ch.isspace() for ch in agent_name):
                raise header.fail("agent name must be one word")
            if any(a.name == agent_name for a in agents):
                raise header.fail(f"duplicate agent {agent_name!r}")
            agents.append(_parse_agent(agent_name, lines))
        elif name == "events":
            events.extend(_parse_event(ln) for ln in lines)
        elif name == "config":
            config = _parse_config(lines)
        else:
            raise header.fail(f"unknown section [{name}]")
    if map_spec is None:
        raise ParseError(1, 1, "missing [map] section")
    doc = ScenarioDoc(map_spec, tuple(objects), tuple(agents), tuple(events), config)
    validate(doc)
    return doc


def _parse_map(header: _Line, lines: list[_Line]) -> MapSpec:
    rows: list[str] = []
    cell_size = None
    origin = (0.0, 0.0)
    for ln in lines:
        s = ln.text.strip()
        if set(s) <= {"#", "."}:
            if rows and len(s) != len(rows[0]):
                raise ln.fail(f"grid row has width {len(s)}, expected {len(rows[0])}")
            rows.append(s)
            continue
        key, value = _key_value(ln)
        if key == "cell_size":
            (cell_size,) = ln.floats(value.split(), 1, "cell_size")
            if cell_size <= 0:
                raise ln.fail("cell_size must be positive", value)
        elif key == "origin":
            origin = tuple(ln.floats(value.split(), 2, "origin"))
        else:
            raise ln.fail(f"unknown map key {key!r}", key)
    if not rows:
        raise header.fail("map has no grid rows")
    if cell_size is None:
        raise header.fail("map needs cell_size")
    return MapSpec(tuple(rows), cell_size, origin)


def _parse_object(ln: _Line) -> ObjectSpec:
    parts = [p.strip() for p in ln.text.split("|")]
    if len(parts) != 3 or not parts[0] or not parts[1]:
        raise ln.fail("object line must be 'id | class | x y z'")
    if any(ch.isspace() for ch in parts[0]):
        raise ln.fail("object id may not contain spaces", parts[0])
    pos = ln.floats(parts[2].split(), 3, "object position")
    return ObjectSpec(parts[0], parts[1], tuple(pos))


def _parse_agent(name: str, lines: list[_Line]) -> AgentSpec:
    start = None
    speed = 1.0
    fov = (math.pi / 3, 8.0)
    script: list = []
    absences: list[tuple[float, float]] = []
    for ln in lines:
        s = ln.text.strip()
        if "=" in s:
            key, value = _key_value(ln)
            toks = value.split()
            if key == "start":
                start = tuple(ln.floats(toks, 4, "start (x y z heading)"))
            elif key == "speed":
                (speed,) = ln.floats(toks, 1, "speed")
            elif key == "fov":
                fov = tuple(ln.floats(toks, 2, "fov (half_angle max_range)"))
            else:
                raise ln.fail(f"unknown agent key {key!r}", key)
            continue
        verb, *toks = s.split()
        if verb == "goto":
            script.append(Goto(*ln.floats(toks, 2, "goto")))
        elif verb == "wait":
            script.append(Wait(*ln.floats(toks, 1, "wait")))
        elif verb == "follow":
            if len(toks) != 2:
                raise ln.fail("follow needs 'follow AGENT DISTANCE'")
            (dist,) = ln.floats(toks[1:], 1, "follow distance")
            script.append(Follow(toks[0], dist))
        elif verb == "absent":
            t0, t1 = ln.floats(toks, 2, "absent")
            absences.append((t0, t1))
        else:
            raise ln.fail(f"unknown agent directive {verb!r}", verb)
    if start is None:
        raise ParseError(lines[0].number if lines else 1, 1, f"agent {name!r} needs a start pose")
    return AgentSpec(name, start, speed, fov, tuple(script), tuple(absences))


def _parse_event(ln: _Line) -> EventSpec:
    verb, *toks = ln.text.split()
    if not toks:
        raise ln.fail(f"event {verb!r} needs a time")
    (at,) = ln.floats(toks[:1], 1, "event time")
    rest = toks[1:]
    if verb == "relocate":
        if len(rest) != 4:
            raise ln.fail("relocate needs 'relocate AT ID X Y Z'")
        return TimelineEvent(at, Relocate(rest[0], tuple(ln.floats(rest[1:], 3, "relocate position"))))
    if verb == "present":
        if len(rest) != 2:
            raise ln.fail("present needs 'present AT AGENT true|false'")
        return TimelineEvent(at, SetPresent(rest[0], _parse_bool(ln, rest[1])))
    if verb == "inject":
        if len(rest) != 3:
            raise ln.fail("inject needs 'inject AT AGENT X Y'")
        return TimelineEvent(at, WaypointInject(rest[0], tuple(ln.floats(rest[1:], 2, "inject position"))))
    if verb == "shuffle":
        if len(rest) != 2:
            raise ln.fail("shuffle needs 'shuffle AT SEED FRACTION'")
        try:
            seed = int(rest[0])
        except ValueError:
            raise ln.fail(f"shuffle seed {rest[0]!r} is not an integer", rest[0]) from None
        (fraction,) = ln.floats(rest[1:], 1, "shuffle fraction")
        return ShuffleSpec(at, seed, fraction)
    raise ln.fail(f"unknown event {verb!r}", verb)


def _parse_config(lines: list[_Line]) -> ScenarioConfig:
    values = {}
    known = {f.name for f in fields(ScenarioConfig)}
    for ln in lines:
        key, value = _key_value(ln)
        if key not in known:
            raise ln.fail(f"unknown config key {key!r}", key)
        if key in _BOOL_KEYS:
            values[key] = _parse_bool(ln, value)
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ln.fail(f"{key} must be an integer", value) from None
        elif key in _STR_KEYS:
            values[key] = value
        elif key in _TUPLE_KEYS:
            toks = value.split()
            values[key] = tuple(ln.floats(toks, len(toks), key))
        else:
            (values[key],) = ln.floats(value.split(), 1, key)
    return ScenarioConfig(**values)


# -- validation -------------------------------------------------------------

def validate(doc: ScenarioDoc) -> None:
    try:
        grid = doc.map.to_grid()
    except ValueError as exc:
        raise ValidationError(f"map: {exc}") from None

    def free(point) -> bool:
        return grid.contains_point(point) and grid.is_free(world_to_cell(point, grid))

    ids = set()
    for obj in doc.objects:
        if obj.id in ids:
            raise ValidationError(f"duplicate object id {obj.id!r}")
        ids.add(obj.id)
        if not free(obj.position):
            raise ValidationError(f"object {obj.id!r} is not on a FREE cell")
    names = {a.name for a in doc.agents}
    for required in (HUMAN, ROBOT):
        if required not in names:
            raise ValidationError(f"scenario needs an agent named {required!r}")
    for agent in doc.agents:
        if not free(agent.start[:2]):
            raise ValidationError(f"agent {agent.name!r} does not start on a FREE cell")
        if agent.speed <= 0:
            raise ValidationError(f"agent {agent.name!r}: speed must be positive")
        try:
            FovParams(*agent.fov)
        except ValueError as exc:
            raise ValidationError(f"agent {agent.name!r}: {exc}") from None
        for d in agent.script:
            if isinstance(d, Goto) and not free((d.x, d.y)):
                raise ValidationError(f"agent {agent.name!r}: goto ({d.x}, {d.y}) is not a FREE cell")
            if isinstance(d, Wait) and d.seconds < 0:
                raise ValidationError(f"agent {agent.name!r}: negative wait")
            if isinstance(d, Follow) and (d.target not in names or d.target == agent.name):
                raise ValidationError(f"agent {agent.name!r}: cannot follow {d.target!r}")
        for t0, t1 in agent.absences:
            if not 0 <= t0 < t1:
                raise ValidationError(f"agent {agent.name!r}: absence interval must satisfy 0 <= start < end")
    for ev in doc.events:
        if ev.at < 0:
            raise ValidationError("event times must be non-negative")
        if isinstance(ev, ShuffleSpec):
            if not 0 <= ev.fraction <= 1:
                raise ValidationError("shuffle fraction must lie in [0, 1]")
            continue
        kind = ev.kind
        if isinstance(kind, Relocate):
            if kind.object_id not in ids:
                raise ValidationError(f"relocate names unknown object {kind.object_id!r}")
            if not free(kind.position):
                raise ValidationError(f"relocation of {kind.object_id!r} targets a non-FREE cell")
        elif kind.agent not in names:
            raise ValidationError(f"event names unknown agent {kind.agent!r}")
        elif isinstance(kind, WaypointInject) and not free(kind.position):
            raise ValidationError(f"waypoint for {kind.agent!r} is not a FREE cell")
    cfg = doc.config
    if cfg.dt <= 0 or cfg.duration <= 0:
        raise ValidationError("dt and duration must be positive")
    if cfg.tau <= 0:
        raise ValidationError("tau must be positive")
    if cfg.human_perception not in HUMAN_PERCEPTION_MODES:
        raise ValidationError(f"human_perception must be one of {HUMAN_PERCEPTION_MODES}")
    if min(cfg.sigma_pos, cfg.sigma_heading) < 0:
        raise ValidationError("noise sigmas must be non-negative")
    for p in (cfg.p_drop_object, cfg.p_drop_person):
        if not 0 <= p <= 1:
            raise ValidationError("drop probabilities must lie in [0, 1]")


# -- serialization ----------------------------------------------------------

def serialize(doc: ScenarioDoc) -> str:
    out = ["[map]", f"cell_size = {_fmt(doc.map.cell_size)}", f"origin = {_fmt(doc.map.origin[0])} {_fmt(doc.map.origin[1])}"]
    out.extend(doc.map.rows)
    out += ["", "[objects]"]
    for o in doc.objects:
        out.append(f"{o.id} | {o.cls} | " + " ".join(_fmt(v) for v in o.position))
    for a in doc.agents:
        out += ["", f"[agent {a.name}]"]
        out.append("start = " + " ".join(_fmt(v) for v in a.start))
        out.append(f"speed = {_fmt(a.speed)}")
        out.append(f"fov = {_fmt(a.fov[0])} {_fmt(a.fov[1])}")
        for d in a.script:
            if isinstance(d, Goto):
                out.append(f"goto {_fmt(d.x)} {_fmt(d.y)}")
            elif isinstance(d, Wait):
                out.append(f"wait {_fmt(d.seconds)}")
            else:
                out.append(f"follow {d.target} {_fmt(d.distance)}")
        for t0, t1 in a.absences:
            out.append(f"absent {_fmt(t0)} {_fmt(t1)}")
    out += ["", "[events]"]
    for ev in doc.events:
        if isinstance(ev, ShuffleSpec):
            out.append(f"shuffle {_fmt(ev.at)} {ev.seed} {_fmt(ev.fraction)}")
            continue
        k = ev.kind
        if isinstance(k, Relocate):
            out.append(f"relocate {_fmt(ev.at)} {k.object_id} " + " ".join(_fmt(v) for v in k.position))
        elif isinstance(k, SetPresent):
            out.append(f"present {_fmt(ev.at)} {k.agent} {'true' if k.present else 'false'}")
        else:
            out.append(f"inject {_fmt(ev.at)} {k.agent} {_fmt(k.position[0])} {_fmt(k.position[1])}")
    out += ["", "[config]"]
    cfg = doc.config
    for f in fields(ScenarioConfig):
        v = getattr(cfg, f.name)
        if f.name in _BOOL_KEYS:
            text = "on" if v else "off"
        elif f.name in _INT_KEYS or f.name in _STR_KEYS:
            text = str(v)
        elif f.name in _TUPLE_KEYS:
            text = " ".join(_fmt(x) for x in v)
        else:
            text = _fmt(v)
        out.append(f"{f.name} = {text}".rstrip())
    return "\n".join(out) + "\n"


# -- loading and world construction -----------------------------------------

def bundled_scenarios() -> list[str]:
    folder = resources.files("beliefsim").joinpath("scenarios")
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".scn"))


def read_scenario_text(name_or_path: str) -> str:
    """Read a scenario from a path, or by bundled name (e.g. ``parents_are_out``)."""
    path = Path(name_or_path)
    if path.exists():
        return path.read_text("utf-8")
    if name_or_path in bundled_scenarios():
        return resources.files("beliefsim").joinpath(f"scenarios/{name_or_path}.scn").read_text("utf-8")
    raise FileNotFoundError(f"no scenario file or bundled scenario named {name_or_path!r}")


def load_scenario(name_or_path: str) -> ScenarioDoc:
    return parse_scenario(read_scenario_text(name_or_path))


def initial_belief(doc: ScenarioDoc) -> BeliefState:
    return BeliefState(tuple(ObjectInstance(o.id, o.cls, o.position) for o in doc.objects))


def build_world(doc: ScenarioDoc, seed: Optional[int] = None) -> WorldState:
    """World at t = 0. Shuffle directives are seeded by (directive seed, run seed)."""
    run_seed = doc.config.seed if seed is None else seed
    grid = doc.map.to_grid()
    agents = []
    events: list[TimelineEvent] = []
    for a in doc.agents:
        x, y, z, heading = a.start
        agents.append(
            AgentState(a.name, Pose((x, y, z), heading), FovParams(*a.fov), a.speed, a.script)
        )
        for t0, t1 in a.absences:
            events.append(TimelineEvent(t0, SetPresent(a.name, False)))
            events.append(TimelineEvent(t1, SetPresent(a.name, True)))
    for ev in doc.events:
        if isinstance(ev, ShuffleSpec):
            events.append(TimelineEvent(ev.at, Shuffle((ev.seed, run_seed), ev.fraction)))
        else:
            events.append(ev)
    return WorldState(grid, initial_belief(doc), tuple(agents), rng_seed=run_seed, events=tuple(events))


def with_config(doc: ScenarioDoc, **overrides) -> ScenarioDoc:
    return replace(doc, config=replace(doc.config, **overrides))
