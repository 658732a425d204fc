"""Kernel backend selection, done once at import.

The compiled extension is preferred when present; set CITYFLOWS_PURE_PYTHON=1
to force the pure fallback (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("CITYFLOWS_PURE_PYTHON"):
    from . import _kernels_py as _kernels_impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _kernels_impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _kernels_impl  # type: ignore[no-redef]

        BACKEND = "pure"

pagerank_power = _kernels_impl.pagerank_power
bfs_eccentricities = _kernels_impl.bfs_eccentricities


def backend_name() -> str:
    """'compiled' when the extension module is active, else 'pure'."""
    return BACKEND
