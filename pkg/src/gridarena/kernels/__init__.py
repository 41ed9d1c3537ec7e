"""Hot-kernel dispatch.

``ARENA_BACKEND=numpy`` forces the pure-numpy path; anything else uses the
numba @njit kernels when numba imports cleanly. Both paths are bit-identical
by construction, so backend choice never changes simulation output.
"""

from __future__ import annotations

import os

from . import np_backend

_requested = os.environ.get("ARENA_BACKEND", "numba").lower()

if _requested == "numpy":
    _impl = np_backend
    BACKEND = "numpy"
else:
    try:
        from . import nb_backend as _impl

        BACKEND = "numba"
    except ImportError:
        _impl = np_backend
        BACKEND = "numpy"

noise_field = _impl.noise_field
entity_scan = _impl.entity_scan
crop_batch = _impl.crop_batch


def backend_name() -> str:
    return BACKEND


def implementations() -> dict:
    """Both backend modules, for benchmarks and cross-checks."""
    impls = {"numpy": np_backend}
    try:
        from . import nb_backend

        impls["numba"] = nb_backend
    except ImportError:
        pass
    return impls
