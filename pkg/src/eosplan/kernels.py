"""Backend selection for the sampling kernels.

The compiled extension is used when importable; otherwise the pure-Python
implementation takes over. Both produce identical output. Setting
``EOSPLAN_KERNELS=python`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS: dict[str, ModuleType | None] = {"cython": _ckernels, "python": _pykernels}
_active: ModuleType = _ckernels if _ckernels is not None else _pykernels
if os.environ.get("EOSPLAN_KERNELS") == "python":
    _active = _pykernels


def available_backends() -> list[str]:
    return [name for name, mod in _BACKENDS.items() if mod is not None]


def backend() -> str:
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    mod = _BACKENDS.get(name)
    if mod is None:
        raise RuntimeError(f"kernel backend {name!r} is not available")
    return mod


def use_backend(name: str) -> str:
    """Switch the process-wide backend; returns the previous one."""
    global _active
    previous = backend()
    _active = get(name)
    return previous
