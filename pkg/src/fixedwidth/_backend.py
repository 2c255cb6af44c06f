"""Kernel backend selection.

The compiled extension is used when importable; set ``FIXEDWIDTH_BACKEND=python``
to force the pure-Python kernels (``=compiled`` makes a missing extension an
error instead of a silent fallback).
"""

import importlib
import os

_choice = os.environ.get("FIXEDWIDTH_BACKEND", "auto").lower()

if _choice not in ("auto", "python", "compiled"):
    raise ImportError(f"FIXEDWIDTH_BACKEND must be auto, python or compiled, not {_choice!r}")

if _choice == "python":
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _pykernels as kernels
        BACKEND = "python"


def load(name: str):
    """Import a specific backend module by name (``"python"`` or ``"compiled"``)."""
    module = {"python": "._pykernels", "compiled": "._ckernels"}[name]
    return importlib.import_module(module, __package__)
