"""Search kernel backend selection.

The compiled Cython kernel and the pure-Python kernel implement the same
interface (gray_min_complex, gray_min_real, dkvp_min) with the same
floating point semantics.  The compiled one is preferred when the extension
built; set the environment variable ``COPLAB_KERNEL`` to ``compiled``,
``python``, or ``auto`` to override, or call :func:`use_backend` at runtime.
"""

from __future__ import annotations

import importlib
import os

_MODULES = {
    "compiled": "coplab._gridsearch",
    "python": "coplab._gridsearch_py",
}

_active = None


def _load(choice: str):
    if choice in ("auto", ""):
        try:
            return importlib.import_module(_MODULES["compiled"])
        except ImportError:
            return importlib.import_module(_MODULES["python"])
    if choice not in _MODULES:
        raise ValueError(
            f"unknown kernel backend {choice!r}, expected compiled, python, or auto"
        )
    return importlib.import_module(_MODULES[choice])


def kernel():
    """The active backend module."""
    global _active
    if _active is None:
        _active = _load(os.environ.get("COPLAB_KERNEL", "auto").lower())
    return _active


def active_name() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return kernel().BACKEND_NAME


def use_backend(name: str):
    """Switch backends ('compiled', 'python', or 'auto'); returns the module."""
    global _active
    _active = _load(name.lower())
    return _active
