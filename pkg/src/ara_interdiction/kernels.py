"""Backend selection for the numeric kernels.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is used. Both expose ``BeliefKernel`` and ``best_path`` with
identical semantics and floating-point operation order.
"""

from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS: dict[str, ModuleType | None] = {"cython": _ckernels, "python": _pykernels}
_active: ModuleType = _ckernels if _ckernels is not None else _pykernels


def available() -> list[str]:
    return [name for name, mod in _BACKENDS.items() if mod is not None]


def backend() -> str:
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def set_backend(name: str) -> None:
    global _active
    mod = _BACKENDS.get(name)
    if mod is None:
        raise ValueError(f"kernel backend {name!r} unavailable (have {available()})")
    _active = mod


def module(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    mod = _BACKENDS.get(name)
    if mod is None:
        raise ValueError(f"kernel backend {name!r} unavailable")
    return mod


def BeliefKernel(*args, **kwargs):
    return _active.BeliefKernel(*args, **kwargs)


def best_path(node_count, heads, out_ptr, rel):
    return _active.best_path(node_count, heads, out_ptr, rel)
