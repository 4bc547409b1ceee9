import math

import numpy as np
import pytest

from dipole_flux.classical import (
    FieldPoint,
    HarmonicTrajectory,
    TabulatedTrajectory,
    classical_radiated_power,
    electric_source_field,
    larmor_power,
    radiation_source_fields,
    radiation_source_potential,
    static_trajectory,
    time_averaged_radiated_power,
    trajectory_from_dict,
)
from dipole_flux.geometry import sphere_grid


def test_harmonic_derivatives_consistent():
    tr = HarmonicTrajectory([0.3, 0, 1], 1.7, 0.4)
    h = 1e-5
    for t in (0.0, 0.9, 3.3):
        assert np.allclose((tr.d(t + h) - tr.d(t - h)) / (2 * h), tr.ddot(t), atol=1e-8)
        assert np.allclose((tr.ddot(t + h) - tr.ddot(t - h)) / (2 * h), tr.dddot(t), atol=1e-8)


def test_far_field_transverse_and_b_orthogonal(rng):
    tr = HarmonicTrajectory([0.2, -0.5, 1.0], 2.0)
    for _ in range(20):
        p = FieldPoint(rng.normal(size=3), 7.0, 9.5)
        e, b = radiation_source_fields(tr, p)
        assert abs(np.dot(e, p.xhat)) < 1e-14 * (np.linalg.norm(e) + 1e-300) + 1e-300
        assert abs(np.dot(b, e)) < 1e-14 * np.dot(e, e) + 1e-300
        assert np.linalg.norm(b) == pytest.approx(np.linalg.norm(e), rel=1e-14)


def test_far_zone_matches_radiation_field():
    tr = HarmonicTrajectory([0, 0, 1.0], 1.3)
    p = FieldPoint(np.array([1.0, 0.2, 0.1]), 4.0, 6.0)
    assert np.allclose(electric_source_field(tr, p).far, radiation_source_fields(tr, p)[0], rtol=1e-15)


def test_potential_derivative_gives_field():
    tr = HarmonicTrajectory([0, 0.4, 1.0], 1.1)
    n = np.array([0.3, 1.0, 0.2])
    h = 1e-5
    a = lambda t: radiation_source_potential(tr, FieldPoint(n, 3.0, t))
    e = radiation_source_fields(tr, FieldPoint(n, 3.0, 5.0))[0]
    assert np.allclose(-(a(5.0 + h) - a(5.0 - h)) / (2 * h), e, atol=1e-9)


def test_larmor_average():
    tr = HarmonicTrajectory([0, 0, 2.0], 1.5)
    v = time_averaged_radiated_power(tr, 5.0, grid=sphere_grid())
    assert v == pytest.approx(larmor_power(2.0, 1.5), rel=1e-12)


def test_static_dipole_radiates_nothing():
    tr = static_trajectory([0, 0, 1.0])
    assert classical_radiated_power(tr, 3.0, 4.0) == 0.0
    assert time_averaged_radiated_power(tr, 3.0) == 0.0


def test_tabulated_matches_harmonic():
    h = HarmonicTrajectory([0, 0, 1.0], 1.0)
    dt = 0.01
    ts = np.arange(0, 20, dt)
    tab = TabulatedTrajectory(dt, np.array([h.d(t) for t in ts]))
    for t in (0.0, 3.05, 10.0, float(ts[-1])):
        assert np.allclose(tab.d(t), h.d(t), atol=1e-9)
        assert np.allclose(tab.ddot(t), h.ddot(t), atol=1e-6)
        assert np.allclose(tab.dddot(t), h.dddot(t), atol=1e-4)
    with pytest.raises(ValueError, match="outside"):
        tab.d(25.0)


def test_trajectory_from_dict_errors():
    with pytest.raises(ValueError):
        trajectory_from_dict({"type": "spiral"})
    with pytest.raises(ValueError):
        TabulatedTrajectory(0.1, np.zeros((3, 3)))


def test_origin_rejected():
    with pytest.raises(ValueError):
        FieldPoint(np.array([1.0, 0, 0]), 0.0, 1.0)
    with pytest.raises(ValueError):
        classical_radiated_power(static_trajectory([0, 0, 1]), 0.0, 1.0)


def test_power_independent_of_radius():
    tr = HarmonicTrajectory([0, 0, 1.0], 2.0)
    vals = [classical_radiated_power(tr, x, x + 0.37) for x in (1.0, 10.0, 1000.0)]
    assert np.allclose(vals, vals[0], rtol=1e-12)
    assert vals[0] > 0 or math.isclose(vals[0], 0.0)
