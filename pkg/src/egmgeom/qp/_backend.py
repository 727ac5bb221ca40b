"""Pick the compiled kernel when it is importable.

Set ``EGMGEOM_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernel_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled


def _default():
    if os.environ.get("EGMGEOM_PURE_PYTHON", "").lower() in ("1", "true", "yes"):
        return "python"
    return "cython" if _compiled is not None else "python"


BACKEND = _default()
kernel = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def get_kernel(name=None):
    if name is None:
        return kernel
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable QP backend {name!r}") from None
