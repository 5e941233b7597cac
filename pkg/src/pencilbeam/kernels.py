"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded.  Set ``PENCILBEAM_PURE_PYTHON=1`` to force the fallback.
"""

import os
from types import ModuleType

from . import _fallback


def _load_compiled() -> ModuleType | None:
    if os.environ.get("PENCILBEAM_PURE_PYTHON", "").strip() not in ("", "0"):
        return None
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()
_impl = _compiled if _compiled is not None else _fallback

BACKEND = "compiled" if _compiled is not None else "python"


def backend(name: str | None = None) -> ModuleType:
    """Kernel module by name (``"compiled"``/``"python"``), default the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return _compiled is not None


emf_accumulate = _impl.emf_accumulate
overlap_counts = _impl.overlap_counts
