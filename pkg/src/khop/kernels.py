"""Selects the compiled lens-chain counter when available.

Set ``KHOP_PURE_PYTHON=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

from . import _chains_py

BACKEND = "python"
count_chains = _chains_py.count_chains

if os.environ.get("KHOP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _chains as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        BACKEND = "cython"
        count_chains = _compiled.count_chains

__all__ = ["BACKEND", "count_chains"]
