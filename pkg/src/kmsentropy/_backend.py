"""Selection between the compiled kernels and the NumPy fallback.

The compiled extension is used when it imports and
``KMSENTROPY_PURE_PYTHON`` is unset or ``0``.
"""
import os

from . import _kernels_py

_FORCE_PY = os.environ.get("KMSENTROPY_PURE_PYTHON", "0") not in ("", "0")

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

ACTIVE = "python" if (_FORCE_PY or _compiled is None) else "compiled"
kernels = BACKENDS[ACTIVE]


def get_backend(name=None):
    """Kernel module by name (``"compiled"`` or ``"python"``); the active one by default."""
    if name is None:
        return kernels
    try:
        return BACKENDS[name]
    except KeyError:
        raise ImportError(f"kernel backend {name!r} is not available") from None
