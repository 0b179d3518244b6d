"""Pure-Python grid and assignment kernels.

This module mirrors ``_kernels_c.pyx`` operation for operation so that both
backends return bit-identical results. Keep the two in lockstep.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

# Fixed expansion order; diagonals last.
NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1))


def trace_line(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Cells on the 8-connected line from (x0, y0) to (x1, y1), both inclusive.

    One cell per step along the major axis. The minor coordinate is the
    segment's exact value rounded half toward +inf, which makes the visited
    set independent of direction.
    """
    dx = x1 - x0
    dy = y1 - y0
    if abs(dx) >= abs(dy):
        steps = abs(dx)
        if steps == 0:
            return [(x0, y0)]
        sx = 1 if dx > 0 else -1
        den = 2 * steps
        return [(x0 + sx * k, y0 + (2 * dy * k + steps) // den) for k in range(steps + 1)]
    steps = abs(dy)
    sy = 1 if dy > 0 else -1
    den = 2 * steps
    return [(x0 + (2 * dx * k + steps) // den, y0 + sy * k) for k in range(steps + 1)]


def line_clear(walls: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> bool:
    """True iff no cell strictly between the endpoints is a wall."""
    cells = trace_line(x0, y0, x1, y1)
    for x, y in cells[1:-1]:
        if walls[y, x]:
            return False
    return True


def astar(walls: np.ndarray, sx: int, sy: int, gx: int, gy: int):
    """Octile A* on an 8-connected grid without corner cutting.

    Returns ``(cells, n_straight, n_diagonal)`` or ``None`` when the goal is
    unreachable. Heap keys are ``(f, h, row-major index)``.
    """
    height, width = walls.shape
    flat = walls.ravel().tolist()
    n = width * height
    start = sy * width + sx
    goal = gy * width + gx

    g_val = [math.inf] * n
    g_str = [0] * n
    g_dia = [0] * n
    parent = [-1] * n
    closed = bytearray(n)

    def octile(x: int, y: int) -> float:
        ax = abs(x - gx)
        ay = abs(y - gy)
        mn = ax if ax < ay else ay
        mx = ax if ax > ay else ay
        return float(mx - mn) + mn * SQRT2

    g_val[start] = 0.0
    h0 = octile(sx, sy)
    heap = [(h0, h0, start)]
    while heap:
        _, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        if cur == goal:
            cells = []
            node = cur
            while node != -1:
                cells.append((node % width, node // width))
                node = parent[node]
            cells.reverse()
            return cells, g_str[cur], g_dia[cur]
        closed[cur] = 1
        cx = cur % width
        cy = cur // width
        for ddx, ddy in NEIGHBORS:
            nx = cx + ddx
            ny = cy + ddy
            if nx < 0 or ny < 0 or nx >= width or ny >= height:
                continue
            nb = ny * width + nx
            if flat[nb] or closed[nb]:
                continue
            if ddx != 0 and ddy != 0:
                if flat[cy * width + nx] or flat[ny * width + cx]:
                    continue
                ns = g_str[cur]
                nd = g_dia[cur] + 1
            else:
                ns = g_str[cur] + 1
                nd = g_dia[cur]
            ng = ns + nd * SQRT2
            if ng < g_val[nb]:
                g_val[nb] = ng
                g_str[nb] = ns
                g_dia[nb] = nd
                parent[nb] = cur
                h = octile(nx, ny)
                heapq.heappush(heap, (ng + h, h, nb))
    return None


def solve_assignment(cost: np.ndarray) -> list[int]:
    """Kuhn-Munkres with potentials for an n x m matrix, n <= m.

    Returns the column assigned to each row. Callers guarantee the shape.
    """
    n, m = cost.shape
    if n == 0:
        return []
    a = cost.tolist()
    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            ui = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    cols = [-1] * n
    for j in range(1, m + 1):
        if p[j] != 0:
            cols[p[j] - 1] = j - 1
    return cols
