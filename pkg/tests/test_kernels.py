import importlib

import numpy as np
import pytest

from dipole_flux import _pykernels, kernels

try:
    from dipole_flux import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def _data(rng, n=1000):
    om = np.sort(rng.uniform(0, 100, n))
    wt = rng.uniform(0, 0.1, n)
    h = om**2 * np.exp(-om / 30)
    return om, wt, h


@needs_ext
def test_pole_sum_agrees(rng):
    om, wt, h = _data(rng)
    for t in (0.0, 1.0, 50.0):
        a = _ckernels.pole_sum(om, wt, h, 1.3**2 * np.exp(-1.3 / 30), 1.3, t)
        b = _pykernels.pole_sum(om, wt, h, 1.3**2 * np.exp(-1.3 / 30), 1.3, t)
        assert abs(a - b) <= 1e-12 * max(abs(b), 1.0)


@needs_ext
def test_direct_and_sinc_sums_agree(rng):
    om, wt, h = _data(rng)
    for t in (0.0, 3.0, 70.0):
        a, b = _ckernels.direct_sum(om, wt, h, -2.0, t), _pykernels.direct_sum(om, wt, h, -2.0, t)
        assert abs(a - b) <= 1e-12 * max(abs(b), 1.0)
        a, b = _ckernels.sinc_pair_sum(om, wt, h, 1.5, t), _pykernels.sinc_pair_sum(om, wt, h, 1.5, t)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    a = _ckernels.avg_sinc_pair_sum(om, wt, h, 1.5, 40.0)
    b = _pykernels.avg_sinc_pair_sum(om, wt, h, 1.5, 40.0)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@needs_ext
def test_lorentz_sums_agree(rng):
    om, wt, h = _data(rng)
    a = _ckernels.lorentz_pair_sum(om, wt, h, 1.0, 1e-3)
    b = _pykernels.lorentz_pair_sum(om, wt, h, 1.0, 1e-3)
    assert np.allclose(a, b, rtol=1e-12)


def test_python_backend_forced(monkeypatch):
    monkeypatch.setenv("DIPOLE_FLUX_BACKEND", "python")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("DIPOLE_FLUX_BACKEND")
        importlib.reload(kernels)


def test_wrappers_accept_lists():
    v = kernels.sinc_pair_sum([1.0, 2.0], [0.5, 0.5], [1.0, 1.0], 0.5, 1.0)
    ref = _pykernels.sinc_pair_sum(np.array([1.0, 2.0]), np.array([0.5, 0.5]), np.ones(2), 0.5, 1.0)
    assert v == pytest.approx(ref, rel=1e-14)


def test_kernel_sums_deterministic(rng):
    om, wt, h = _data(rng)
    vals = {kernels.pole_sum(om, wt, h, 1.0, 1.1, 5.0) for _ in range(5)}
    assert len(vals) == 1
