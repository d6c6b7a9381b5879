"""Rollout kernel selection: compiled extension if available, else Python.

Set VPOMAZE_BACKEND=python to force the fallback (useful for the paired
benchmark and for debugging); VPOMAZE_BACKEND=compiled insists on the
extension and raises if it did not build.
"""

import os

from . import _rollout_py

_requested = os.environ.get("VPOMAZE_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _rollout_py
else:
    try:
        from . import _rollout as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "VPOMAZE_BACKEND=compiled but the extension is not built; "
                "reinstall with a C compiler or unset VPOMAZE_BACKEND"
            ) from None
        _impl = _rollout_py

BACKEND = _impl.BACKEND_NAME
rollout_answer = _impl.rollout_answer


def get_backend(name: str | None = None):
    """Fetch a specific backend module (for tests and benchmarks)."""
    if name in (None, "", BACKEND):
        return _impl
    if name == "python":
        return _rollout_py
    if name == "compiled":
        from . import _rollout  # raises ImportError if not built
        return _rollout
    raise ValueError(f"unknown backend: {name!r}")
