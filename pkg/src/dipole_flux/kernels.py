"""Kernel backend selection.

The compiled Cython kernels are used when the extension is importable;
otherwise the NumPy implementations are used.  Setting the environment
variable ``DIPOLE_FLUX_BACKEND=python`` forces the NumPy path.
"""

import os

import numpy as np

from . import _pykernels

_forced = os.environ.get("DIPOLE_FLUX_BACKEND", "").strip().lower()

_impl = _pykernels
BACKEND = "python"
if _forced != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on build
        if _forced == "compiled":
            raise
        _impl = _pykernels


def _c(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def pole_sum(om, wt, h, h_pole, pole, t):
    """Sum of ``wt * (h - h_pole)/(om - pole) * exp(-i (om - pole) t)``."""
    return _impl.pole_sum(_c(om), _c(wt), _c(h), float(h_pole), float(pole), float(t))


def direct_sum(om, wt, h, pole, t):
    """Sum of ``wt * h/(om - pole) * exp(-i (om - pole) t)`` (pole off the nodes)."""
    return _impl.direct_sum(_c(om), _c(wt), _c(h), float(pole), float(t))


def sinc_pair_sum(om, wt, h, a, t):
    """Sum of ``wt * h * [sin((om-a)t)/(om-a) - sin((om+a)t)/(om+a)]``."""
    return _impl.sinc_pair_sum(_c(om), _c(wt), _c(h), float(a), float(t))


def avg_sinc_pair_sum(om, wt, h, a, T):
    """Time average over [0, T] of :func:`sinc_pair_sum`, done in closed form per node."""
    return _impl.avg_sinc_pair_sum(_c(om), _c(wt), _c(h), float(a), float(T))


def lorentz_pair_sum(om, wt, h, w0, eps):
    """Real and imaginary parts of ``sum wt * h * i[1/(om-w0+i eps) - 1/(om+w0+i eps)]``.

    Returned as ``(re, im)`` where ``re`` is the Lorentzian (nascent delta)
    part and ``im`` the principal-value part.
    """
    return _impl.lorentz_pair_sum(_c(om), _c(wt), _c(h), float(w0), float(eps))
