"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Set ``BELIEFSIM_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("BELIEFSIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

trace_line = _impl.trace_line
line_clear = _impl.line_clear
astar = _impl.astar
solve_assignment = _impl.solve_assignment

__all__ = ["BACKEND", "trace_line", "line_clear", "astar", "solve_assignment"]
