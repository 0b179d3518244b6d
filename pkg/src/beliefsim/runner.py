"""Episode runner, metric logs, plots and ablation sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .assistance import load_relevance_map, relevant_subset, score_notifications, unaware_objects
from .belief import BeliefState, dump_belief, resolve_update
from .scenario import HUMAN, ROBOT, ScenarioDoc, build_world, initial_belief, with_config
from .smcc import figures_of_merit
from .tom import init_tom, on_person_sighting, update_robot_belief
from .world import (
    STREAM_HUMAN_OBJECTS,
    STREAM_PERSON,
    STREAM_ROBOT_OBJECTS,
    PerceptionNoise,
    make_rng,
    sense_objects,
    sense_person,
    step,
)

CSV_COLUMNS = (
    "frame",
    "t",
    "smcc_inferred_vs_human",
    "smcc_human_vs_true",
    "smcc_robot_vs_true",
    "person_visible",
    "events_cumulative",
)

ABLATION_KNOBS = ("sigma_pos", "sigma_heading", "p_drop_object", "p_drop_person", "trajectory_inference")

BELIEF_NAMES = ("robot", "human", "inferred", "truth")


@dataclass(frozen=True)
class MetricsRow:
    frame: int
    t: float
    inferred_vs_human: float
    human_vs_true: float
    robot_vs_true: float
    person_visible: bool
    events_cumulative: int


@dataclass(frozen=True)
class AssistRecord:
    t: float
    activity: str
    notify: tuple[str, ...]
    truth: tuple[str, ...]
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class RunConfig:
    seed: Optional[int] = None
    out_dir: Optional[Path] = None
    formats: tuple[str, ...] = ("csv",)
    overrides: dict = field(default_factory=dict)
    dump_frames: bool = False


@dataclass
class EpisodeResult:
    rows: list[MetricsRow]
    beliefs: dict[str, BeliefState]
    assistance: list[AssistRecord]
    snapshots: list[dict[str, BeliefState]] = field(default_factory=list)

    def series(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]


def frame_count(duration: float, dt: float) -> int:
    return max(1, math.ceil(duration / dt - 1e-9))


def run_episode(doc: ScenarioDoc, cfg: Optional[RunConfig] = None, *, keep_snapshots: bool = False) -> EpisodeResult:
    """Simulate the scenario and log the three figures of merit per frame.

    Per frame: world step, robot observes and updates its map, the person
    updates their own map from what they see, the robot looks for the
    person and updates the inferred map, optional assistance queries, log.
    """
    cfg = cfg or RunConfig()
    if cfg.overrides:
        doc = with_config(doc, **cfg.overrides)
    conf = doc.config
    seed = conf.seed if cfg.seed is None else cfg.seed
    world = build_world(doc, seed)
    grid = world.grid
    prior = initial_belief(doc)
    human_belief = prior
    tom = init_tom(prior)

    noise = PerceptionNoise(conf.sigma_pos, conf.sigma_heading, conf.p_drop_object, conf.p_drop_person)
    human_noise = noise if conf.human_perception == "noisy" else PerceptionNoise()
    rng_robot = make_rng(seed, STREAM_ROBOT_OBJECTS)
    rng_person = make_rng(seed, STREAM_PERSON)
    rng_human = make_rng(seed, STREAM_HUMAN_OBJECTS)
    relevance = load_relevance_map() if conf.assist_at else None
    # consecutive-frame sightings count as continuous observation
    continuity_gap = 1.5 * conf.dt

    rows: list[MetricsRow] = []
    assists: list[AssistRecord] = []
    snapshots: list[dict[str, BeliefState]] = []
    fired = 0
    prev_t = 0.0
    for k in range(1, frame_count(conf.duration, conf.dt) + 1):
        world = step(world, conf.dt)
        t = world.clock
        fired += len(world.last_fired)
        robot = world.agent(ROBOT)
        human = world.agent(HUMAN)
        tom = replace(tom, frame=k)

        if robot.present:
            tom = update_robot_belief(tom, sense_objects(world, robot, noise, rng_robot))
        if human.present:
            human_belief, _ = resolve_update(human_belief, sense_objects(world, human, human_noise, rng_human))
        sighting = sense_person(world, robot, noise, rng_person) if robot.present else None
        if sighting is not None:
            tom, _ = on_person_sighting(
                tom, sighting, t, grid, human.fov,
                infer_trajectory=conf.trajectory_inference,
                continuity_gap=continuity_gap,
            )

        for checkpoint in conf.assist_at:
            if prev_t < checkpoint <= t + 1e-9:
                assists.extend(_assist(t, tom.robot_belief, tom.inferred_human_belief, human_belief, world.truth, conf.tau, relevance))
        prev_t = t

        merit = figures_of_merit(tom.inferred_human_belief, human_belief, tom.robot_belief, world.truth)
        rows.append(MetricsRow(k, t, merit.inferred_vs_human, merit.human_vs_true, merit.robot_vs_true, sighting is not None, fired))
        if keep_snapshots or cfg.dump_frames:
            snapshots.append(_beliefs(tom, human_belief, world.truth))

    result = EpisodeResult(rows, _beliefs(tom, human_belief, world.truth), assists, snapshots)
    if cfg.out_dir is not None:
        write_outputs(result, Path(cfg.out_dir), cfg.formats, dump_frames=cfg.dump_frames)
    return result


def _beliefs(tom, human_belief: BeliefState, truth: BeliefState) -> dict[str, BeliefState]:
    return {
        "robot": tom.robot_belief,
        "human": human_belief,
        "inferred": tom.inferred_human_belief,
        "truth": truth,
    }


def _assist(t, robot, inferred, human, truth, tau, relevance) -> list[AssistRecord]:
    predicted_unaware = unaware_objects(robot, inferred, tau)
    actual_unaware = unaware_objects(truth, human, tau)
    out = []
    for activity in sorted(relevance):
        notify = relevant_subset(predicted_unaware, activity, relevance)
        wanted = relevant_subset(actual_unaware, activity, relevance)
        p, r, f1 = score_notifications(notify, wanted)
        out.append(AssistRecord(t, activity, tuple(notify.ids()), tuple(wanted.ids()), p, r, f1))
    return out


# -- outputs ----------------------------------------------------------------

def _row_values(r: MetricsRow) -> list[str]:
    return [
        str(r.frame),
        f"{r.t:.6f}",
        f"{r.inferred_vs_human:.6f}",
        f"{r.human_vs_true:.6f}",
        f"{r.robot_vs_true:.6f}",
        "1" if r.person_visible else "0",
        str(r.events_cumulative),
    ]


def metrics_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(_row_values(r))
    return buf.getvalue()


def read_metrics_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def metrics_jsonl(rows: Sequence[MetricsRow]) -> str:
    out = []
    for r in rows:
        out.append(json.dumps(dict(zip(CSV_COLUMNS, [
            r.frame, round(r.t, 6), round(r.inferred_vs_human, 6), round(r.human_vs_true, 6),
            round(r.robot_vs_true, 6), r.person_visible, r.events_cumulative,
        ]))))
    return "\n".join(out) + "\n"


_SERIES = (
    ("inferred_vs_human", "inferred vs human (inference error)", "#d62728"),
    ("human_vs_true", "human vs true (scenario difficulty)", "#1f77b4"),
    ("robot_vs_true", "robot vs true (robot map error)", "#2ca02c"),
)


def metrics_svg(rows: Sequence[MetricsRow], title: str = "Mean SMCC per object") -> str:
    """Three SMCC series on one time axis, as plain SVG text."""
    width, height = 720, 400
    left, right, top, bottom = 70, 20, 40, 110
    pw, ph = width - left - right, height - top - bottom
    t_max = max((r.t for r in rows), default=1.0) or 1.0
    y_max = max((getattr(r, s) for r in rows for s, _, _ in _SERIES), default=0.0)
    y_max = y_max * 1.1 if y_max > 0 else 1.0

    def sx(t: float) -> str:
        return f"{left + pw * t / t_max:.2f}"

    def sy(v: float) -> str:
        return f"{top + ph * (1.0 - v / y_max):.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        t = t_max * i / 5
        v = y_max * i / 5
        out.append(f'<text x="{sx(t)}" y="{top + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:.1f}</text>')
        out.append(f'<text x="{left - 6}" y="{sy(v)}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.3f}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{top + ph + 36}" text-anchor="middle" font-family="sans-serif" font-size="12">time [s]</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {top + ph / 2:.1f})">mean SMCC [m/object]</text>')
    for n, (attr, label, color) in enumerate(_SERIES):
        pts = " ".join(f"{sx(r.t)},{sy(getattr(r, attr))}" for r in rows)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + ph + 56 + 16 * n
        out.append(f'<line x1="{left}" y1="{ly}" x2="{left + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + 30}" y="{ly + 4}" font-family="sans-serif" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def assistance_tsv(records: Sequence[AssistRecord]) -> str:
    lines = ["t\tactivity\tnotify\ttruth\tprecision\trecall\tf1"]
    for a in records:
        lines.append(
            f"{a.t:.6f}\t{a.activity}\t{','.join(a.notify)}\t{','.join(a.truth)}\t"
            f"{a.precision:.6f}\t{a.recall:.6f}\t{a.f1:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_outputs(result: EpisodeResult, out_dir: Path, formats: Sequence[str] = ("csv",), *, dump_frames: bool = False) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(rel: str, text: str) -> None:
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        written.append(path)

    if "csv" in formats:
        put("metrics.csv", metrics_csv(result.rows))
    if "jsonl" in formats:
        put("metrics.jsonl", metrics_jsonl(result.rows))
    if "svg" in formats:
        put("smcc.svg", metrics_svg(result.rows))
    for name in BELIEF_NAMES:
        put(f"beliefs/{name}.txt", dump_belief(result.beliefs[name]))
    if result.assistance:
        put("assistance.tsv", assistance_tsv(result.assistance))
    if dump_frames:
        for row, snap in zip(result.rows, result.snapshots):
            for name in BELIEF_NAMES:
                put(f"frames/{row.frame:05d}/{name}.txt", dump_belief(snap[name]))
    return written


# -- ablation ---------------------------------------------------------------

@dataclass(frozen=True)
class AblationRow:
    settings: tuple[tuple[str, object], ...]
    per_seed: tuple[float, ...]

    @property
    def mean(self) -> float:
        return sum(self.per_seed) / len(self.per_seed)


def mean_inference_error(rows: Sequence[MetricsRow]) -> float:
    return sum(r.inferred_vs_human for r in rows) / len(rows)


def _ablation_cell(args) -> float:
    doc, settings, seed = args
    result = run_episode(doc, RunConfig(seed=seed, overrides=dict(settings)))
    return mean_inference_error(result.rows)


def ablate(doc: ScenarioDoc, grid: dict[str, list], seeds: Sequence[int] = (0,), jobs: int = 1) -> list[AblationRow]:
    """One episode per (configuration, seed); rows keep the grid's order."""
    unknown = set(grid) - set(ABLATION_KNOBS)
    if unknown:
        raise ValueError(f"unknown ablation knobs: {', '.join(sorted(unknown))}")
    if not seeds:
        raise ValueError("ablation needs at least one seed")
    keys = list(grid)
    configs = [tuple(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]
    cells = [(doc, settings, seed) for settings in configs for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_ablation_cell, cells))
    else:
        values = [_ablation_cell(c) for c in cells]
    n = len(seeds)
    return [AblationRow(settings, tuple(values[i * n:(i + 1) * n])) for i, settings in enumerate(configs)]


def format_ablation(rows: Sequence[AblationRow]) -> str:
    if not rows:
        return ""
    keys = [k for k, _ in rows[0].settings]
    header = keys + ["mean inference error [m]"]

    def show(v) -> str:
        if isinstance(v, bool):
            return "on" if v else "off"
        return repr(v)

    table = [header] + [[show(v) for _, v in r.settings] + [f"{r.mean:.6f}"] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def load_grid_file(path: Path | str) -> tuple[dict[str, list], list[int]]:
    """Ablation grid: ``{"knobs": {name: [values...]}, "seeds": [...]}``."""
    data = json.loads(Path(path).read_text("utf-8"))
    knobs = data.get("knobs", {})
    seeds = [int(s) for s in data.get("seeds", [0])]
    if not isinstance(knobs, dict):
        raise ValueError("'knobs' must map knob names to value lists")
    for k, v in knobs.items():
        if not isinstance(v, list) or not v:
            raise ValueError(f"knob {k!r} needs a non-empty list of values")
    return knobs, seeds

