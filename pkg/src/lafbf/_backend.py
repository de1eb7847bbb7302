"""Kernel backend selection.

The compiled extension ``lafbf._core`` is used when importable; otherwise the
numpy implementation in ``lafbf._pycore`` takes over.  Set
``LAFBF_BACKEND=python`` to force the fallback.
"""

import os

from . import _pycore

NAME = "python"
_impl = _pycore
if os.environ.get("LAFBF_BACKEND", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        NAME = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pycore

select_chain = _impl.select_chain
active_range = _impl.active_range
active_mask = _impl.active_mask
synth_kernel = _impl.synth_kernel
synth_points = _impl.synth_points


def get(name: str):
    """Return the kernel module by name (``"python"`` or ``"cython"``)."""
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")
