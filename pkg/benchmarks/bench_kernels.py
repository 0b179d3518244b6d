"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints one row per kernel with the median time per call for each backend
and the speedup, then one full episode per backend.
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from beliefsim import _kernels_py

try:
    from beliefsim import _kernels_c
except ImportError:
    _kernels_c = None


def _cases(rng):
    walls = (rng.random((48, 48)) < 0.25).astype(np.uint8)
    walls[0, 0] = walls[47, 47] = 0
    pairs = [tuple(int(v) for v in rng.integers(0, 48, 4)) for _ in range(200)]
    costs = [rng.random((6, 6)) for _ in range(200)]
    return walls, pairs, costs


def _kernels(impl, walls, pairs, costs):
    def astar():
        for x0, y0, x1, y1 in pairs[:20]:
            w = walls.copy()
            w[y0, x0] = w[y1, x1] = 0
            impl.astar(w, x0, y0, x1, y1)

    def line_clear():
        for x0, y0, x1, y1 in pairs:
            impl.line_clear(walls, x0, y0, x1, y1)

    def solve_assignment():
        for c in costs:
            impl.solve_assignment(c)

    return {"astar x20 (48x48)": astar, "line_clear x200": line_clear, "solve_assignment x200 (6x6)": solve_assignment}


def _median(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def _episode_seconds(pure: bool) -> float:
    env = dict(os.environ, BELIEFSIM_PURE_PYTHON="1" if pure else "0")
    code = (
        "import time\n"
        "from beliefsim.scenario import load_scenario\n"
        "from beliefsim.runner import run_episode\n"
        "doc = load_scenario('parents_are_out')\n"
        "t = time.perf_counter(); run_episode(doc); print(time.perf_counter() - t)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; install with 'pip install -e . --no-build-isolation'", file=sys.stderr)
        return 1
    walls, pairs, costs = _cases(np.random.default_rng(0))
    py = _kernels(_kernels_py, walls, pairs, costs)
    c = _kernels(_kernels_c, walls, pairs, costs)
    print(f"{'kernel':<30}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name in py:
        tp = _median(py[name], args.repeat) * 1e3
        tc = _median(c[name], args.repeat) * 1e3
        print(f"{name:<30}{tp:>14.3f}{tc:>14.3f}{tp / tc:>9.1f}x")
    ep_py = _episode_seconds(pure=True)
    ep_c = _episode_seconds(pure=False)
    print(f"{'parents_are_out episode':<30}{ep_py * 1e3:>14.1f}{ep_c * 1e3:>14.1f}{ep_py / ep_c:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
