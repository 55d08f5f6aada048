"""Kernel backend selection.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is loaded. Setting ``PHASETOMO_BACKEND=python`` forces the fallback
even when the extension is present.
"""

import importlib
import logging
import os

log = logging.getLogger(__name__)

_MODULES = {"cython": "phasetomo._ckernels", "python": "phasetomo._kernels_py"}


def load(name):
    """Import and return the kernel module called ``name`` ("cython" or "python")."""
    if name not in _MODULES:
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(_MODULES[name])


def available():
    """Names of the backends that can be imported in this installation."""
    names = []
    for name in _MODULES:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select():
    wanted = os.environ.get("PHASETOMO_BACKEND", "").strip().lower()
    if wanted == "python":
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        if wanted == "cython":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")
        return "python", load("python")


BACKEND, kernels = _select()
