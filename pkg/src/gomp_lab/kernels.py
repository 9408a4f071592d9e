"""Backend selection for the support-enumeration kernels.

The compiled Cython module is used when it was built and imports cleanly;
otherwise the numpy implementation takes over.  Setting the environment
variable ``GOMP_LAB_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from gomp_lab import _rip_fallback as fallback

compiled = None
if os.environ.get("GOMP_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from gomp_lab import _rip_kernel as compiled
    except ImportError:  # extension not built
        compiled = None

BACKENDS = {"python": fallback}
if compiled is not None:
    BACKENDS["compiled"] = compiled

BACKEND = "compiled" if compiled is not None else "python"
active = BACKENDS[BACKEND]


def get(name=None):
    """Return the kernel module called ``name`` (default: the active one)."""
    if name is None:
        return active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None
