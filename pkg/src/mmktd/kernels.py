"""Backend selection for the hot kernels.

The compiled extension ``mmktd._ckernels`` is used when it imports;
otherwise, or when the environment variable ``MMKTD_BACKEND`` is
``python``, the numpy versions in ``mmktd._pykernels`` are used.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("MMKTD_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels

rbf_activations = _impl.rbf_activations
greedy_action = _impl.greedy_action
bank_fuse = _impl.bank_fuse

__all__ = ["BACKEND", "rbf_activations", "greedy_action", "bank_fuse"]
