"""Planar occupancy-grid geometry.

Cells are addressed as ``(ix, iy)`` with ``iy`` growing with world y. The
walls array is stored ``[iy, ix]``. Only walls occlude; objects and agents
never block sight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TypeVar

import numpy as np

from . import kernels
from .errors import InvalidCell, NoPath, OutOfBounds

Cell = tuple[int, int]
Point = Sequence[float]

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

WALL_CHAR = "#"
FREE_CHAR = "."


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    out = (theta + math.pi) % TWO_PI - math.pi
    if out >= math.pi:
        out -= TWO_PI
    return out


@dataclass(frozen=True, eq=False)
class GridMap:
    walls: np.ndarray
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        walls = np.ascontiguousarray(self.walls, dtype=np.uint8)
        if walls.ndim != 2 or walls.shape[0] < 1 or walls.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2D array")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        walls = (walls != 0).astype(np.uint8)
        walls.setflags(write=False)
        object.__setattr__(self, "walls", walls)
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def empty(cls, width: int, height: int, cell_size: float = 1.0, origin=(0.0, 0.0)) -> GridMap:
        return cls(np.zeros((height, width), dtype=np.uint8), cell_size, origin)

    @classmethod
    def from_ascii(cls, rows: Iterable[str], cell_size: float, origin=(0.0, 0.0)) -> GridMap:
        """Build a grid from text rows; the first row is the highest y."""
        rows = [r.strip() for r in rows if r.strip()]
        if not rows:
            raise ValueError("grid has no rows")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("grid rows have unequal length")
        bad = set("".join(rows)) - {WALL_CHAR, FREE_CHAR}
        if bad:
            raise ValueError(f"unexpected grid characters: {''.join(sorted(bad))!r}")
        walls = np.array([[c == WALL_CHAR for c in r] for r in reversed(rows)], dtype=np.uint8)
        return cls(walls, cell_size, origin)

    def to_ascii(self) -> list[str]:
        return [
            "".join(WALL_CHAR if v else FREE_CHAR for v in row)
            for row in self.walls[::-1]
        ]

    @property
    def width(self) -> int:
        return int(self.walls.shape[1])

    @property
    def height(self) -> int:
        return int(self.walls.shape[0])

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def is_wall(self, cell: Cell) -> bool:
        return bool(self.walls[cell[1], cell[0]])

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and not self.is_wall(cell)

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.cell_size,
            self.origin[1] + (cell[1] + 0.5) * self.cell_size,
        )

    def free_cells(self) -> list[Cell]:
        """FREE cells in row-major order (y, then x)."""
        ys, xs = np.nonzero(self.walls == 0)
        return [(int(x), int(y)) for y, x in zip(ys, xs)]

    def contains_point(self, point: Point) -> bool:
        x, y = point[0], point[1]
        ox, oy = self.origin
        return (
            ox <= x <= ox + self.width * self.cell_size
            and oy <= y <= oy + self.height * self.cell_size
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridMap):
            return NotImplemented
        return (
            self.cell_size == other.cell_size
            and self.origin == other.origin
            and np.array_equal(self.walls, other.walls)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Pose:
    position: tuple[float, float, float]
    heading: float = 0.0

    def __post_init__(self) -> None:
        p = tuple(float(v) for v in self.position)
        if len(p) == 2:
            p = (p[0], p[1], 0.0)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))


@dataclass(frozen=True)
class FovParams:
    half_angle: float = math.pi / 3
    max_range: float = 8.0

    def __post_init__(self) -> None:
        if not 0.0 < self.half_angle <= math.pi:
            raise ValueError("half_angle must lie in (0, pi]")
        if not self.max_range > 0.0:
            raise ValueError("max_range must be positive")


@dataclass(frozen=True)
class GridPath:
    cells: tuple[Cell, ...]
    cost: float


def world_to_cell(point: Point, grid: GridMap) -> Cell:
    """Cell containing ``point``; cell boundaries belong to the +x/+y side,
    except the maximal edge which belongs to the last cell."""
    if not grid.contains_point(point):
        raise OutOfBounds(f"point ({point[0]}, {point[1]}) outside grid")
    ix = int(math.floor((point[0] - grid.origin[0]) / grid.cell_size))
    iy = int(math.floor((point[1] - grid.origin[1]) / grid.cell_size))
    return (min(max(ix, 0), grid.width - 1), min(max(iy, 0), grid.height - 1))


def _check_cell(grid: GridMap, cell: Cell) -> None:
    if not grid.in_bounds(cell):
        raise OutOfBounds(f"cell {cell} outside {grid.width}x{grid.height} grid")


def trace_line(grid: GridMap, start: Cell, end: Cell) -> list[Cell]:
    _check_cell(grid, start)
    _check_cell(grid, end)
    return kernels.trace_line(int(start[0]), int(start[1]), int(end[0]), int(end[1]))


def line_of_sight(grid: GridMap, start: Point, end: Point) -> bool:
    """No WALL strictly between the endpoint cells; endpoints never block."""
    a = world_to_cell(start, grid)
    b = world_to_cell(end, grid)
    return kernels.line_clear(grid.walls, a[0], a[1], b[0], b[1])


def in_fov(observer: Pose, fov: FovParams, target: Point) -> bool:
    dx = target[0] - observer.position[0]
    dy = target[1] - observer.position[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return True
    if dist > fov.max_range:
        return False
    diff = normalize_angle(math.atan2(dy, dx) - observer.heading)
    return abs(diff) <= fov.half_angle


T = TypeVar("T")


def visible_objects(grid: GridMap, observer: Pose, fov: FovParams, objects: Iterable[T]) -> list[T]:
    """Objects inside the view cone with a clear line; input order kept.

    Items need a ``position`` attribute. Positions outside the grid are
    never visible.
    """
    eye = observer.position
    return [
        o for o in objects
        if grid.contains_point(o.position)
        and in_fov(observer, fov, o.position)
        and line_of_sight(grid, eye, o.position)
    ]


def astar(grid: GridMap, start: Cell, goal: Cell) -> GridPath:
    """Minimal-cost 8-connected path; diagonals may not cut wall corners."""
    for cell in (start, goal):
        if not grid.in_bounds(cell):
            raise InvalidCell(f"cell {cell} out of bounds")
        if grid.is_wall(cell):
            raise InvalidCell(f"cell {cell} is a wall")
    found = kernels.astar(grid.walls, int(start[0]), int(start[1]), int(goal[0]), int(goal[1]))
    if found is None:
        raise NoPath(f"no path from {start} to {goal}")
    cells, n_straight, n_diag = found
    return GridPath(tuple(cells), n_straight + n_diag * SQRT2)
