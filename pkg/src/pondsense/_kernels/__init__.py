"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy backend is
the fallback.  Set ``PONDSENSE_BACKEND=python`` or ``=compiled`` to force a
choice (forcing ``compiled`` raises if the extension is missing).
"""

import os

from . import pybackend
from .pybackend import field_params, mono_saddle_time

_requested = os.environ.get("PONDSENSE_BACKEND", "auto").lower()

_compiled = None
if _requested in ("auto", "compiled"):
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None
        if _requested == "compiled":
            raise ImportError(
                "PONDSENSE_BACKEND=compiled but the extension is not built; "
                "run pip install -e . --no-build-isolation"
            )

BACKEND = "compiled" if _compiled is not None else "python"


def get_backend(name: str = "auto"):
    """Return the kernel module for ``name`` in {auto, python, compiled}."""
    if name in ("auto", None):
        return _compiled if _compiled is not None else pybackend
    if name == "python":
        return pybackend
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel backend is not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    if _compiled is not None:
        names.append("compiled")
    return names


def amplitude_grid(*args, **kwargs):
    return get_backend("auto").amplitude_grid(*args, **kwargs)
