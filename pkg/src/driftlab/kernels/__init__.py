"""Integrator backend selection.

The compiled Cython kernel is used when available; setting the environment
variable DRIFTLAB_FORCE_PYTHON=1 (before import) forces the numpy
fallback. Both backends consume identical per-chain noise streams.
"""
from __future__ import annotations

import os

from . import _em_py

_forced = os.environ.get("DRIFTLAB_FORCE_PYTHON", "") == "1"

if not _forced:
    try:
        from . import _em  # type: ignore[attr-defined]
    except ImportError:
        _em = None
else:
    _em = None

HAVE_COMPILED = _em is not None


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "python"


def compiled_module():
    """The compiled extension module, or None."""
    return _em


python_module = _em_py
