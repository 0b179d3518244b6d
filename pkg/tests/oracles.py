"""Independent reference implementations used by the tests.

None of these share code with the package: they are slow, obvious
re-derivations of the same contracts.
"""

from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).parent / "fixtures"

SQRT2 = math.sqrt(2.0)


def brute_force_assignment(cost) -> float:
    """Minimum over every injective row -> column map, summed in row order."""
    a = np.asarray(cost, dtype=float)
    n, m = a.shape
    best = math.inf
    for cols in itertools.permutations(range(m), n):
        total = 0.0
        for i, j in enumerate(cols):
            total += float(a[i, j])
        best = min(best, total)
    return 0.0 if n == 0 else best


def brute_force_class_cost(pa, pb) -> float:
    if len(pa) > len(pb):
        pa, pb = pb, pa
    if not pa:
        return 0.0
    return min(
        math.fsum(math.dist(p, pb[j]) for p, j in zip(pa, cols))
        for cols in itertools.permutations(range(len(pb)), len(pa))
    )


def sampled_line_cells(a, b, samples_per_cell: int = 64) -> list[tuple[int, int]]:
    """Cells of the segment between two cell centers, found by dense sampling.

    The segment is sampled finely along its major axis. Every major-axis
    column it crosses contributes the cell whose minor index is the exact
    minor coordinate at the column center, halves rounded up.
    """
    (x0, y0), (x1, y1) = a, b
    dx, dy = x1 - x0, y1 - y0
    x_major = abs(dx) >= abs(dy)
    steps = max(abs(dx), abs(dy))
    if steps == 0:
        return [(x0, y0)]
    columns = []
    n = samples_per_cell * steps
    for i in range(n + 1):
        t = Fraction(i, n)
        major = (x0 + t * dx) if x_major else (y0 + t * dy)
        col = math.floor(major + Fraction(1, 2))
        if col not in columns:
            columns.append(col)
    cells = []
    for col in columns:
        if x_major:
            minor = Fraction(y0) + Fraction(dy * (col - x0), dx)
            cells.append((col, math.floor(minor + Fraction(1, 2))))
        else:
            minor = Fraction(x0) + Fraction(dx * (col - y0), dy)
            cells.append((math.floor(minor + Fraction(1, 2)), col))
    return cells


def sampled_line_clear(walls: np.ndarray, a, b) -> bool:
    cells = sampled_line_cells(a, b)
    return not any(walls[y, x] for x, y in cells[1:-1])


def dijkstra_cost(walls: np.ndarray, start, goal):
    """Exact shortest 8-connected path cost without corner cutting, or None.

    Costs are carried as (straight, diagonal) counts and compared by value.
    """
    h, w = walls.shape

    def free(x, y):
        return 0 <= x < w and 0 <= y < h and not walls[y, x]

    if not (free(*start) and free(*goal)):
        return None
    dist = {start: (0, 0)}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal:
            a, b = dist[cell]
            return a + b * SQRT2
        x, y = cell
        for ddx in (-1, 0, 1):
            for ddy in (-1, 0, 1):
                if ddx == ddy == 0:
                    continue
                nx, ny = x + ddx, y + ddy
                if not free(nx, ny):
                    continue
                diagonal = ddx != 0 and ddy != 0
                if diagonal and not (free(x + ddx, y) and free(x, y + ddy)):
                    continue
                a, b = dist[cell]
                cand = (a, b + 1) if diagonal else (a + 1, b)
                value = cand[0] + cand[1] * SQRT2
                old = dist.get((nx, ny))
                if old is None or value < old[0] + old[1] * SQRT2 - 1e-12:
                    dist[(nx, ny)] = cand
                    heapq.heappush(heap, (value, (nx, ny)))
    return None


def random_walls(rng: np.random.Generator, width: int = 16, height: int = 16, density: float = 0.25) -> np.ndarray:
    return (rng.random((height, width)) < density).astype(np.uint8)


def free_cells(walls: np.ndarray) -> list[tuple[int, int]]:
    ys, xs = np.nonzero(walls == 0)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def random_scenario_text(rng: np.random.Generator) -> str:
    """A valid scenario document exercising every section and directive."""
    w, h = int(rng.integers(4, 12)), int(rng.integers(3, 9))
    cell = float(rng.choice([0.25, 0.5, 1.0]))
    ox, oy = float(rng.integers(-3, 3)), float(rng.uniform(-2, 2))
    walls = rng.random((h, w)) < 0.2
    walls[0, 0] = False
    rows = ["".join("#" if walls[r, c] else "." for c in range(w)) for r in range(h)]
    free = [(c, h - 1 - r) for r in range(h) for c in range(w) if not walls[r, c]]

    def point():
        c, r = free[int(rng.integers(len(free)))]
        fx, fy = rng.uniform(0.05, 0.95, 2)
        return ox + (c + fx) * cell, oy + (r + fy) * cell

    classes = ["cup", "plate", "remote control", "dish soap", "book"]
    lines = [f"; generated {int(rng.integers(1 << 30))}", "[map]", f"cell_size = {cell}", f"origin = {ox} {oy}", *rows, ""]
    lines.append("[objects]")
    ids = []
    for i in range(int(rng.integers(0, 7))):
        x, y = point()
        oid = f"obj_{i}"
        ids.append(oid)
        lines.append(f"{oid} | {classes[int(rng.integers(len(classes)))]} | {x} {y} {float(rng.uniform(0, 2))}")
    names = ["human", "robot"] + (["visitor"] if rng.random() < 0.3 else [])
    for name in names:
        x, y = point()
        lines += ["", f"[agent {name}]", f"start = {x} {y} 0.0 {float(rng.uniform(-3, 3))}"]
        if rng.random() < 0.5:
            lines.append(f"speed = {float(rng.uniform(0.3, 2.0))}")
        if rng.random() < 0.5:
            lines.append(f"fov = {float(rng.uniform(0.2, 3.1))} {float(rng.uniform(1, 10))}")
        for _ in range(int(rng.integers(0, 4))):
            kind = rng.random()
            if kind < 0.4:
                gx, gy = point()
                lines.append(f"goto {gx} {gy}")
            elif kind < 0.7:
                lines.append(f"wait {float(rng.uniform(0, 5))}")
            else:
                other = [n for n in names if n != name]
                lines.append(f"follow {other[int(rng.integers(len(other)))]} {float(rng.uniform(0.5, 3))}")
        if rng.random() < 0.3:
            t0 = float(rng.uniform(0, 5))
            lines.append(f"absent {t0} {t0 + float(rng.uniform(0.1, 5))}")
    lines += ["", "[events]"]
    for _ in range(int(rng.integers(0, 5))):
        at = float(rng.uniform(0, 20))
        kind = rng.random()
        if kind < 0.3 and ids:
            x, y = point()
            lines.append(f"relocate {at} {ids[int(rng.integers(len(ids)))]} {x} {y} 0.5")
        elif kind < 0.5:
            lines.append(f"present {at} {names[int(rng.integers(len(names)))]} {'true' if rng.random() < 0.5 else 'off'}")
        elif kind < 0.75:
            x, y = point()
            lines.append(f"inject {at} {names[int(rng.integers(len(names)))]} {x} {y}")
        else:
            lines.append(f"shuffle {at} {int(rng.integers(0, 100))} {float(rng.uniform(0, 1))}")
    lines += ["", "[config]"]
    if rng.random() < 0.5:
        lines.append(f"dt = {float(rng.choice([0.1, 0.25, 0.5]))}")
    if rng.random() < 0.5:
        lines.append(f"duration = {float(rng.uniform(1, 60))}")
    if rng.random() < 0.5:
        lines.append(f"seed = {int(rng.integers(0, 1000))}")
    if rng.random() < 0.5:
        lines.append(f"sigma_pos = {float(rng.uniform(0, 0.2))}")
    if rng.random() < 0.5:
        lines.append(f"trajectory_inference = {'on' if rng.random() < 0.5 else 'off'}")
    if rng.random() < 0.3:
        lines.append("human_perception = noisy")
    if rng.random() < 0.3:
        lines.append(f"assist_at = {float(rng.uniform(1, 10))} {float(rng.uniform(10, 20))}")
    return "\n".join(lines) + "\n"
