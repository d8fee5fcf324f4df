"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``GK_PURE_PYTHON`` is set to a non-empty value other
than ``0``, the numpy implementation is used.
"""

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)


def _load():
    if os.environ.get("GK_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels
    except ImportError as exc:  # extension not built
        log.debug("compiled kernels unavailable (%s); using numpy fallback", exc)
        return _kernels_py
    return _kernels


_impl = _load()

BACKEND = _impl.BACKEND
game_table = _impl.game_table
local_gain = _impl.local_gain
euler_step = _impl.euler_step
homogeneous_relax = _impl.homogeneous_relax


def backends():
    """Every importable backend module, pure Python first."""
    mods = [_kernels_py]
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        mods.append(_kernels)
    return mods
