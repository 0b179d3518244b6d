"""Both kernel backends must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from beliefsim import _kernels_py, kernels

from oracles import brute_force_assignment, random_walls

try:
    from beliefsim import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

needs_c = pytest.mark.skipif(_kernels_c is None, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, BELIEFSIM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import beliefsim.kernels as k; print(k.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("impl", [_kernels_py, pytest.param(_kernels_c, marks=needs_c)], ids=["python", "cython"])
def test_solve_assignment_optimal(impl):
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(n, 7))
        cost = rng.random((n, m)) * 10
        cols = impl.solve_assignment(cost)
        assert len(set(cols)) == n
        total = sum(float(cost[i, c]) for i, c in enumerate(cols))
        assert total == pytest.approx(brute_force_assignment(cost), abs=1e-9)


@needs_c
def test_backends_agree_on_random_inputs():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        w, h = int(rng.integers(1, 20)), int(rng.integers(1, 20))
        walls = random_walls(rng, w, h, float(rng.uniform(0, 0.5)))
        x0, x1 = (int(v) for v in rng.integers(0, w, 2))
        y0, y1 = (int(v) for v in rng.integers(0, h, 2))
        assert _kernels_py.trace_line(x0, y0, x1, y1) == _kernels_c.trace_line(x0, y0, x1, y1)
        assert _kernels_py.line_clear(walls, x0, y0, x1, y1) == _kernels_c.line_clear(walls, x0, y0, x1, y1)
        walls[y0, x0] = walls[y1, x1] = 0
        assert _kernels_py.astar(walls, x0, y0, x1, y1) == _kernels_c.astar(walls, x0, y0, x1, y1)
        n = int(rng.integers(0, 7))
        m = int(rng.integers(n, 8)) if n else int(rng.integers(0, 4))
        cost = np.round(rng.random((n, m)) * 4, 1)  # rounding invites ties
        if n:
            assert _kernels_py.solve_assignment(cost) == _kernels_c.solve_assignment(cost)
