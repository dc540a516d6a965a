"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``TULLOCK_PURE_PYTHON`` is set to a non-empty value,
the numpy fallback is used. ``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

if os.environ.get("TULLOCK_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

collocation_residuals = _impl.collocation_residuals
collocation_fd_jacobian = _impl.collocation_fd_jacobian
mean_win_prob = _impl.mean_win_prob
lottery_winners = _impl.lottery_winners

__all__ = ["BACKEND", "collocation_residuals", "collocation_fd_jacobian", "mean_win_prob", "lottery_winners"]
