"""Acceptance gate. Each check prints one PASS/FAIL line.

Run directly with ``python tests/test_acceptance.py`` for the summary only.
"""

from __future__ import annotations

import filecmp
import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beliefsim.assistance import unaware_objects  # noqa: E402
from beliefsim.belief import (  # noqa: E402
    Detection,
    ObjectInstance,
    ObservationBatch,
    dump_belief,
    init_belief,
    min_cost_assignment,
)
from beliefsim.geometry import FovParams, GridMap, Pose, astar, line_of_sight  # noqa: E402
from beliefsim.errors import NoPath  # noqa: E402
from beliefsim.runner import RunConfig, metrics_csv, run_episode  # noqa: E402
from beliefsim.scenario import load_scenario, parse_scenario, serialize, with_config  # noqa: E402
from beliefsim.smcc import smcc  # noqa: E402
from beliefsim.tom import init_tom, on_person_sighting, update_robot_belief  # noqa: E402

from oracles import (  # noqa: E402
    FIXTURES,
    brute_force_assignment,
    dijkstra_cost,
    free_cells,
    random_scenario_text,
    random_walls,
    sampled_line_clear,
)


# -- 1 ----------------------------------------------------------------------

def check_assignment_oracle():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(n, 7))
        dets = rng.uniform(0, 5, (n, 3))
        insts = rng.uniform(0, 5, (m, 3))
        cost = np.array([[math.dist(d, o) for o in insts] for d in dets])
        _, total = min_cost_assignment(cost)
        if total != brute_force_assignment(cost):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5.0
    return ok, f"200 instances, {mismatches} cost mismatches, {elapsed:.2f} s (limit 5 s)"


# -- 2 ----------------------------------------------------------------------

def _state(rng, shape):
    insts = []
    for cls, n in shape.items():
        for i in range(n):
            insts.append(ObjectInstance(f"{cls}_{i}", cls, tuple(rng.normal(0, 3, 3))))
    return init_belief(insts)


def check_smcc_axioms():
    rng = np.random.default_rng(1002)
    start = time.perf_counter()
    bad = {"non-negativity": 0, "identity": 0, "symmetry": 0, "triangle": 0}
    for _ in range(1000):
        shape = {c: int(rng.integers(1, 5)) for c in ("cup", "plate", "book")[: int(rng.integers(1, 4))]}
        a, b, c = (_state(rng, shape) for _ in range(3))
        ab, ba = smcc(a, b).total, smcc(b, a).total
        if min(ab, ba, smcc(a, c).total) < 0:
            bad["non-negativity"] += 1
        relabeled = init_belief(ObjectInstance(o.id, o.cls, o.position) for o in reversed(a.instances))
        if smcc(a, a).total > 1e-12 or smcc(a, relabeled).total > 1e-12 or ab <= 1e-12:
            bad["identity"] += 1
        if abs(ab - ba) > 1e-9 * max(abs(ab), abs(ba)):
            bad["symmetry"] += 1
        if smcc(a, c).total > ab + smcc(b, c).total + 1e-9:
            bad["triangle"] += 1
    elapsed = time.perf_counter() - start
    ok = not any(bad.values()) and elapsed < 10.0
    failures = ", ".join(f"{k} {v}" for k, v in bad.items())
    return ok, f"1000 triples, violations: {failures}; {elapsed:.2f} s (limit 10 s)"


# -- 3 ----------------------------------------------------------------------

def check_full_observability():
    doc = load_scenario(str(FIXTURES / "open_room.scn"))
    cfg = doc.config
    assert cfg.sigma_pos == cfg.sigma_heading == cfg.p_drop_object == cfg.p_drop_person == 0.0
    res = run_episode(doc)
    always_seen = all(r.person_visible for r in res.rows)
    worst = max(r.inferred_vs_human for r in res.rows)
    difficulty = max(r.human_vs_true for r in res.rows)
    ok = always_seen and worst <= 1e-9 and difficulty > 0.1
    return ok, (
        f"{len(res.rows)} frames, person visible every frame: {always_seen}, "
        f"max inferred-vs-human {worst:.3g} (limit 1e-9), max human-vs-true {difficulty:.3f}"
    )


# -- 4 ----------------------------------------------------------------------

def check_static_walkthrough():
    res = run_episode(load_scenario("static_walkthrough"))
    worst = max(max(r.inferred_vs_human, r.human_vs_true, r.robot_vs_true) for r in res.rows)
    return worst == 0.0, f"{len(res.rows)} frames, largest value of any figure of merit {worst}"


# -- 5 ----------------------------------------------------------------------

def check_parents_are_out_shape():
    doc = load_scenario("parents_are_out")
    start = time.perf_counter()
    res = run_episode(doc, RunConfig(seed=7))
    elapsed = time.perf_counter() - start
    rows = res.rows
    human = [r.human_vs_true for r in rows]
    peak = max(human)
    starts_high = human[0] == peak and peak > 0.5
    rises = [
        rows[i].t for i in range(1, len(rows))
        if rows[i].events_cumulative == rows[i - 1].events_cumulative and human[i] > human[i - 1] + 1e-9
    ]
    ends_low = human[-1] < 0.5 * peak
    robot_ok = rows[-1].robot_vs_true <= peak
    ok = starts_high and not rises and ends_low and robot_ok and len(rows) == 120 and elapsed < 30.0
    return ok, (
        f"peak {peak:.3f} at first frame: {starts_high}, rises between events: {len(rises)}, "
        f"final human-vs-true {human[-1]:.3f} (< {0.5 * peak:.3f}), final robot-vs-true {rows[-1].robot_vs_true:.3f}, "
        f"{len(rows)} frames in {elapsed:.2f} s"
    )


# -- 6 ----------------------------------------------------------------------

def _blocks(flags):
    out = []
    for f in flags:
        if not out or out[-1][0] != f:
            out.append([f, 0])
        out[-1][1] += 1
    return [f for f, _ in out]


def _episode_bytes(doc):
    res = run_episode(doc)
    return metrics_csv(res.rows) + "".join(dump_belief(b) for b in res.beliefs.values())


def check_trajectory_inference():
    doc = load_scenario(str(FIXTURES / "corridor.scn"))
    on = run_episode(with_config(doc, trajectory_inference=True))
    off = run_episode(with_config(doc, trajectory_inference=False))
    seen_start_and_end_only = _blocks([r.person_visible for r in on.rows]) == [True, False, True]
    niche = on.beliefs["truth"].get("vase_1").position
    acquired = on.beliefs["inferred"].get("vase_1").position == niche
    missed = off.beliefs["inferred"].get("vase_1").position != niche
    e_on, e_off = on.rows[-1].inferred_vs_human, off.rows[-1].inferred_vs_human
    room = load_scenario(str(FIXTURES / "open_room.scn"))
    identical = _episode_bytes(with_config(room, trajectory_inference=True)) == _episode_bytes(
        with_config(room, trajectory_inference=False)
    )
    ok = seen_start_and_end_only and acquired and missed and e_on < e_off and identical
    return ok, (
        f"sighted only at start and end: {seen_start_and_end_only}, niche object acquired ON {acquired} / OFF {not missed}, "
        f"final error ON {e_on:.3f} < OFF {e_off:.3f}; continuous visibility ON == OFF byte for byte: {identical}"
    )


# -- 7 ----------------------------------------------------------------------

def check_raycast_and_paths():
    rng = np.random.default_rng(1007)
    los_bad = 0
    for _ in range(10):
        walls = random_walls(rng)
        g = GridMap(walls, 1.0)
        for _ in range(50):
            a = tuple(int(v) for v in rng.integers(0, 16, 2))
            b = tuple(int(v) for v in rng.integers(0, 16, 2))
            if line_of_sight(g, g.cell_center(a), g.cell_center(b)) != sampled_line_clear(walls, a, b):
                los_bad += 1
    path_bad = 0
    checked = 0

    def compare(walls, s, t):
        want = dijkstra_cost(walls, s, t)
        try:
            got = astar(GridMap(walls, 1.0), s, t).cost
        except NoPath:
            got = None
        return got == want

    for mask in range(512):
        walls = np.array([(mask >> i) & 1 for i in range(9)], dtype=np.uint8).reshape(3, 3)
        cells = free_cells(walls)
        for s in cells:
            for t in cells:
                checked += 1
                path_bad += not compare(walls, s, t)
    for _ in range(20):
        walls = random_walls(rng, density=0.3)
        cells = free_cells(walls)
        for _ in range(25):
            s = cells[int(rng.integers(len(cells)))]
            t = cells[int(rng.integers(len(cells)))]
            checked += 1
            path_bad += not compare(walls, s, t)
    ok = los_bad == 0 and path_bad == 0
    return ok, f"line of sight: 500 pairs, {los_bad} mismatches; A* vs Dijkstra: {checked} queries, {path_bad} mismatches"


# -- 8 ----------------------------------------------------------------------

def check_unaware_set():
    grid = GridMap.empty(12, 6, cell_size=1.0)
    prior = init_belief([
        ObjectInstance("far", "plate", (1.5, 1.5, 0.9)),
        ObjectInstance("near", "cup", (6.5, 1.5, 0.9)),
        ObjectInstance("seen", "book", (9.5, 4.5, 0.5)),
    ])
    tom = init_tom(prior)
    moved = ObservationBatch((
        Detection("plate", (4.5, 1.5, 0.9)),  # 3 m
        Detection("cup", (6.8, 1.5, 0.9)),  # 0.3 m
        Detection("book", (10.5, 3.5, 0.5)),
    ), 1.0)
    tom = update_robot_belief(tom, moved)
    # the person looks at the book's new spot and nowhere near the other two
    tom, _ = on_person_sighting(tom, Pose((10.5, 1.5, 0.0), math.pi / 2), 2.0, grid, FovParams(math.pi / 6, 8.0))
    unaware = unaware_objects(tom.robot_belief, tom.inferred_human_belief, 0.5).ids()
    taus = [0.05 * k for k in range(1, 100)]
    sets = [set(unaware_objects(tom.robot_belief, tom.inferred_human_belief, t).ids()) for t in taus]
    anti_monotone = all(b <= a for a, b in zip(sets, sets[1:]))
    ok = unaware == ["far"] and anti_monotone and "near" in sets[0] and not sets[-1]
    return ok, f"unaware at tau 0.5: {unaware}; nested over {len(taus)} tau values: {anti_monotone}"


# -- 9 ----------------------------------------------------------------------

def check_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for k in range(2):
            out = Path(tmp) / f"run{k}"
            subprocess.run(
                [sys.executable, "-m", "beliefsim.cli", "run", "parents_are_out", "--seed", "7", "--out", str(out), "--plot"],
                check=True, capture_output=True,
            )
            outs.append(out)
        names = sorted(p.relative_to(outs[0]).as_posix() for p in outs[0].rglob("*") if p.is_file())
        other = sorted(p.relative_to(outs[1]).as_posix() for p in outs[1].rglob("*") if p.is_file())
        same = names == other and all(filecmp.cmp(outs[0] / n, outs[1] / n, shallow=False) for n in names)
        wanted = {"metrics.csv", "smcc.svg", "beliefs/robot.txt", "beliefs/human.txt", "beliefs/inferred.txt", "beliefs/truth.txt"}
        complete = wanted <= set(names)
    return same and complete, f"{len(names)} files compared, byte-identical: {same}, CSV+SVG+4 dumps present: {complete}"


# -- 10 ---------------------------------------------------------------------

def check_round_trip():
    rng = np.random.default_rng(1010)
    failures = 0
    for _ in range(50):
        doc = parse_scenario(random_scenario_text(rng))
        text = serialize(doc)
        again = parse_scenario(text)
        if again != doc or serialize(again) != text:
            failures += 1
    return failures == 0, f"50 generated documents, {failures} not at a fixed point"


CRITERIA = [
    (1, "assignment oracle", check_assignment_oracle),
    (2, "SMCC metric axioms", check_smcc_axioms),
    (3, "full-observability inference", check_full_observability),
    (4, "static walkthrough control", check_static_walkthrough),
    (5, "parents are out curve shape", check_parents_are_out_shape),
    (6, "trajectory inference value", check_trajectory_inference),
    (7, "raycast and pathfinding oracles", check_raycast_and_paths),
    (8, "unaware set", check_unaware_set),
    (9, "determinism", check_determinism),
    (10, "scenario round trip", check_round_trip),
]


def _line(number, name, ok, detail):
    return f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"


@pytest.mark.parametrize("number, name, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(number, name, ok, detail))
    sys.exit(0 if all(results) else 1)
