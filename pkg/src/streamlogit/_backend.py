"""Selects the compiled update kernels, falling back to pure Python.

The compiled extension is preferred when it importable; set
``STREAMLOGIT_BACKEND=python`` (or ``compiled``) to force a choice at
import time. Call sites can also override per call via the ``backend``
argument accepted by :func:`streamlogit.estimators.fit_stream`.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None

_BY_NAME = {"python": _kernels_py}
if _kernels is not None:
    _BY_NAME["compiled"] = _kernels


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BY_NAME))


def default_backend() -> str:
    forced = os.environ.get("STREAMLOGIT_BACKEND")
    if forced:
        if forced not in _BY_NAME:
            raise RuntimeError(
                f"STREAMLOGIT_BACKEND={forced!r} is not available; choices: {available_backends()}"
            )
        return forced
    return "compiled" if _kernels is not None else "python"


def get_kernels(backend: str | None = None):
    """Kernel module for ``backend`` (default: the selected one)."""
    name = backend or default_backend()
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choices: {available_backends()}") from None
