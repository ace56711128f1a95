"""Kernel backend selection.

The compiled extension is used when importable; set ``PHASEHOLO_PUREPY=1`` to
force the numpy fallback.
"""

import logging
import os

from . import _fallback

logger = logging.getLogger(__name__)

_compiled = None
if os.environ.get("PHASEHOLO_PUREPY", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        logger.debug("compiled kernels unavailable, using numpy fallback")

kernels = _compiled if _compiled is not None else _fallback
BACKEND = "cython" if _compiled is not None else "numpy"


def get(name: str):
    """Return kernel module for ``name`` in {"cython", "numpy"}."""
    if name == "numpy":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
