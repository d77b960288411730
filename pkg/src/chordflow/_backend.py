"""Kernel selection and the thread-pool map used for per-ray work.

The compiled extension is used when it imports; setting ``CHORDFLOW_PURE=1``
forces the numpy fallback.  Results never depend on the thread count: work is
split into fixed chunks and concatenated in chunk order.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py

_kernels = None
if os.environ.get("CHORDFLOW_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _kernels = None

BACKEND = "compiled" if _kernels is not None else "python"
_impl = _kernels if _kernels is not None else _kernels_py

_threads = 1
CHUNK = 8192


def set_threads(n: int) -> None:
    global _threads
    _threads = max(1, int(n))


def get_threads() -> int:
    return _threads


def raycast2d(a, b, node_cos, node_sin, h_nodes, z, u, extended=False, impl=None):
    """Batch planar ray cast; see ``_kernels_py.raycast2d``."""
    impl = impl or _impl
    z = np.ascontiguousarray(z, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    p = z.shape[0]
    # the numpy path allocates P x N temporaries, keep chunks modest
    chunk = CHUNK if impl is not _kernels_py else max(256, 2**20 // max(1, len(h_nodes)))
    if p <= chunk:
        return impl.raycast2d(a, b, node_cos, node_sin, h_nodes, z, u, extended)
    bounds = [(s, min(p, s + chunk)) for s in range(0, p, chunk)]

    def work(se):
        s, e = se
        return impl.raycast2d(a, b, node_cos, node_sin, h_nodes, z[s:e], u[s:e], extended)

    if _threads > 1:
        with ThreadPoolExecutor(_threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(se) for se in bounds]
    return np.concatenate([r for r, _ in parts]), np.concatenate([t for _, t in parts])
