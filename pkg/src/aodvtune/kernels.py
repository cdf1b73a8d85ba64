"""Backend selection for the reception kernels.

The compiled extension is preferred when it built; otherwise the pure-Python
twin takes over. Both produce bit-identical results, so the choice only
affects speed. Set ``AODVTUNE_KERNEL=python`` (or ``cython``) to force one,
or call :func:`use_backend` — the benchmark suite does.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None

_BACKENDS = {"python": _kernels_py}
if _kernels_cy is not None:
    _BACKENDS["cython"] = _kernels_cy

# Rebound by use_backend(); call through the module (kernels.broadcast_reception)
# so a swap is visible everywhere.
reception_probability = None
broadcast_reception = None
_active = ""


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return _active


def use_backend(name: str) -> None:
    """Switch the active kernel implementation (tests and benchmarks)."""
    global reception_probability, broadcast_reception, _active
    try:
        mod = _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable kernel backend {name!r}; "
            f"available: {', '.join(available_backends())}"
        ) from None
    reception_probability = mod.reception_probability
    broadcast_reception = mod.broadcast_reception
    _active = name


_requested = os.environ.get("AODVTUNE_KERNEL", "").strip().lower()
use_backend(_requested or ("cython" if _kernels_cy is not None else "python"))
