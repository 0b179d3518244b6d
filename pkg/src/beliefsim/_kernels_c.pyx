# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid and assignment kernels.

Same contracts and arithmetic order as ``_kernels_py``; results are
bit-identical between the two backends.
"""

from libc.math cimport INFINITY, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

cdef double SQRT2 = sqrt(2.0)

cdef int[8] NDX = [1, -1, 0, 0, 1, -1, 1, -1]
cdef int[8] NDY = [0, 0, 1, -1, 1, 1, -1, -1]


cdef inline long floordiv(long num, long den) nogil:
    # den > 0
    cdef long q = num / den
    if (num % den != 0) and (num < 0):
        q -= 1
    return q


def trace_line(int x0, int y0, int x1, int y1):
    cdef long dx = x1 - x0
    cdef long dy = y1 - y0
    cdef long steps, den, k
    cdef int s
    out = []
    if abs(dx) >= abs(dy):
        steps = abs(dx)
        if steps == 0:
            return [(x0, y0)]
        s = 1 if dx > 0 else -1
        den = 2 * steps
        for k in range(steps + 1):
            out.append((x0 + s * k, y0 + floordiv(2 * dy * k + steps, den)))
        return out
    steps = abs(dy)
    s = 1 if dy > 0 else -1
    den = 2 * steps
    for k in range(steps + 1):
        out.append((x0 + floordiv(2 * dx * k + steps, den), y0 + s * k))
    return out


def line_clear(const unsigned char[:, ::1] walls, int x0, int y0, int x1, int y1):
    cdef long dx = x1 - x0
    cdef long dy = y1 - y0
    cdef long steps, den, k
    cdef int s, x, y
    if abs(dx) >= abs(dy):
        steps = abs(dx)
        if steps == 0:
            return True
        s = 1 if dx > 0 else -1
        den = 2 * steps
        for k in range(1, steps):
            x = x0 + s * k
            y = y0 + floordiv(2 * dy * k + steps, den)
            if walls[y, x]:
                return False
        return True
    steps = abs(dy)
    s = 1 if dy > 0 else -1
    den = 2 * steps
    for k in range(1, steps):
        x = x0 + floordiv(2 * dx * k + steps, den)
        y = y0 + s * k
        if walls[y, x]:
            return False
    return True


cdef struct HeapItem:
    double f
    double h
    long idx


cdef inline bint item_less(HeapItem a, HeapItem b) nogil:
    if a.f != b.f:
        return a.f < b.f
    if a.h != b.h:
        return a.h < b.h
    return a.idx < b.idx


cdef struct Heap:
    HeapItem* data
    long size
    long cap


cdef int heap_push(Heap* hp, HeapItem item) nogil:
    cdef long i, parent
    cdef HeapItem* grown
    if hp.size == hp.cap:
        grown = <HeapItem*>malloc(2 * hp.cap * sizeof(HeapItem))
        if grown == NULL:
            return -1
        for i in range(hp.size):
            grown[i] = hp.data[i]
        free(hp.data)
        hp.data = grown
        hp.cap *= 2
    i = hp.size
    hp.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if item_less(item, hp.data[parent]):
            hp.data[i] = hp.data[parent]
            i = parent
        else:
            break
    hp.data[i] = item
    return 0


cdef HeapItem heap_pop(Heap* hp) nogil:
    cdef HeapItem top = hp.data[0]
    cdef HeapItem last
    cdef long i, child
    hp.size -= 1
    if hp.size > 0:
        last = hp.data[hp.size]
        i = 0
        while True:
            child = 2 * i + 1
            if child >= hp.size:
                break
            if child + 1 < hp.size and item_less(hp.data[child + 1], hp.data[child]):
                child += 1
            if item_less(hp.data[child], last):
                hp.data[i] = hp.data[child]
                i = child
            else:
                break
        hp.data[i] = last
    return top


cdef inline double octile(long x, long y, long gx, long gy) nogil:
    cdef long ax = abs(x - gx)
    cdef long ay = abs(y - gy)
    cdef long mn = ax if ax < ay else ay
    cdef long mx = ax if ax > ay else ay
    return <double>(mx - mn) + <double>mn * SQRT2


def astar(const unsigned char[:, ::1] walls, int sx, int sy, int gx, int gy):
    cdef long height = walls.shape[0]
    cdef long width = walls.shape[1]
    cdef long n = width * height
    cdef long start = sy * width + sx
    cdef long goal = gy * width + gx
    cdef double* g_val = <double*>malloc(n * sizeof(double))
    cdef long* g_str = <long*>malloc(n * sizeof(long))
    cdef long* g_dia = <long*>malloc(n * sizeof(long))
    cdef long* parent = <long*>malloc(n * sizeof(long))
    cdef unsigned char* closed = <unsigned char*>malloc(n)
    cdef Heap hp
    cdef HeapItem item
    cdef long i, cur, cx, cy, nx, ny, nb, ns, nd, node
    cdef int d, ddx, ddy
    cdef double ng, h
    cdef bint found = False
    hp.cap = 64
    hp.size = 0
    hp.data = <HeapItem*>malloc(hp.cap * sizeof(HeapItem))
    if (g_val == NULL or g_str == NULL or g_dia == NULL or parent == NULL
            or closed == NULL or hp.data == NULL):
        free(g_val); free(g_str); free(g_dia); free(parent); free(closed); free(hp.data)
        raise MemoryError()
    try:
        for i in range(n):
            g_val[i] = INFINITY
            g_str[i] = 0
            g_dia[i] = 0
            parent[i] = -1
            closed[i] = 0
        g_val[start] = 0.0
        h = octile(sx, sy, gx, gy)
        item.f = h
        item.h = h
        item.idx = start
        if heap_push(&hp, item) != 0:
            raise MemoryError()
        with nogil:
            while hp.size > 0:
                item = heap_pop(&hp)
                cur = item.idx
                if closed[cur]:
                    continue
                if cur == goal:
                    found = True
                    break
                closed[cur] = 1
                cx = cur % width
                cy = cur / width
                for d in range(8):
                    ddx = NDX[d]
                    ddy = NDY[d]
                    nx = cx + ddx
                    ny = cy + ddy
                    if nx < 0 or ny < 0 or nx >= width or ny >= height:
                        continue
                    nb = ny * width + nx
                    if walls[ny, nx] or closed[nb]:
                        continue
                    if ddx != 0 and ddy != 0:
                        if walls[cy, nx] or walls[ny, cx]:
                            continue
                        ns = g_str[cur]
                        nd = g_dia[cur] + 1
                    else:
                        ns = g_str[cur] + 1
                        nd = g_dia[cur]
                    ng = <double>ns + <double>nd * SQRT2
                    if ng < g_val[nb]:
                        g_val[nb] = ng
                        g_str[nb] = ns
                        g_dia[nb] = nd
                        parent[nb] = cur
                        h = octile(nx, ny, gx, gy)
                        item.f = ng + h
                        item.h = h
                        item.idx = nb
                        if heap_push(&hp, item) != 0:
                            break
        if not found:
            return None
        cells = []
        node = goal
        while node != -1:
            cells.append((node % width, node // width))
            node = parent[node]
        cells.reverse()
        return cells, g_str[goal], g_dia[goal]
    finally:
        free(g_val)
        free(g_str)
        free(g_dia)
        free(parent)
        free(closed)
        free(hp.data)


def solve_assignment(cost):
    cdef double[:, ::1] a = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    if n == 0:
        return []
    cdef double[::1] u = np.zeros(n + 1)
    cdef double[::1] v = np.zeros(m + 1)
    cdef double[::1] minv = np.empty(m + 1)
    cdef long[::1] p = np.zeros(m + 1, dtype=np.int_)
    cdef long[::1] way = np.zeros(m + 1, dtype=np.int_)
    cdef unsigned char[::1] used = np.zeros(m + 1, dtype=np.uint8)
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur, ui
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(m + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                ui = u[i0]
                delta = INFINITY
                j1 = 0
                for j in range(1, m + 1):
                    if not used[j]:
                        cur = a[i0 - 1, j - 1] - ui - v[j]
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
