import math

import numpy as np
import pytest

from dipole_flux import flux as fx
from dipole_flux.geometry import sphere_grid
from dipole_flux.quadrature import QuadratureSpec, f_kernel
from dipole_flux.spectrum import real_flux

from conftest import random_spectrum, spontaneous_oracle, two_level


def test_sgn_zero():
    assert fx.sgn(0.0) == 0.0 and fx.sgn(-2.0) == -1.0 and fx.sgn(3.0) == 1.0


def test_bracket_definition():
    w, a, t = 1.7, 0.6, 2.3
    expect = np.conj(f_kernel(a - w, t)) * np.exp(1j * a * t) - f_kernel(a + w, t) * np.exp(-1j * a * t)
    assert fx.second_order_bracket(w, a, t) == pytest.approx(expect, abs=1e-14)


def test_bracket_dtt_against_fd():
    w, a, t, h = 2.1, 0.7, 1.3, 1e-3
    fd = (fx.second_order_bracket(w, a, t + h) - 2 * fx.second_order_bracket(w, a, t)
          + fx.second_order_bracket(w, a, t - h)) / h**2
    assert abs(fd - fx.second_order_bracket_dtt(w, a, t)) < 1e-5


def test_split_sums_to_integrand(rng):
    w = rng.uniform(0.01, 50, 500)
    a = rng.uniform(-10, 10, 500)
    t = rng.uniform(0, 100, 500)
    full = fx.second_order_integrand(w, a, t)
    i, o = fx.integrand_split(w, a, t)
    scale = np.maximum(np.maximum(np.abs(full), np.abs(i + o)), 1.0)
    assert np.max(np.abs(full - (i + o)) / scale) < 1e-10


def test_total_real_flux_two_level():
    r = fx.total_real_flux(two_level())
    assert r.total == pytest.approx(1 / (3 * math.pi), rel=1e-13)
    (line,) = r.transitions
    assert line.first_order == pytest.approx(line.second_order, rel=1e-14)


def test_numerical_path_matches_analytic(rng):
    s = random_spectrum(rng, 4, excited="L2")
    a = fx.total_real_flux(s, method="analytic")
    n = fx.total_real_flux(s, method="numerical")
    assert n.total == pytest.approx(a.total, rel=1e-3)
    for ta, tn in zip(a.transitions, n.transitions):
        assert abs(ta.second_order - tn.second_order) <= max(5 * tn.second_order_error, 1e-7 * abs(ta.second_order))


def test_upward_only_excess_without_sgn_term(rng):
    s = random_spectrum(rng, 4, excited="L1")
    r = fx.total_real_flux(s)
    first = math.fsum(t.first_order for t in r.transitions)
    assert first > r.total
    for t in r.transitions:
        if t.omega < 0:
            assert t.power == 0.0


def test_unknown_method():
    with pytest.raises(ValueError):
        fx.real_second_order_coefficients(two_level(), method="fancy")


def test_angular_map_sum_matches_total(rng):
    s = random_spectrum(rng)
    g = sphere_grid()
    th, ph, w, dens = fx.angular_map(s, g)
    assert np.sum(w * dens) == pytest.approx(real_flux(s).total, rel=1e-12)
    assert th.shape == ph.shape == w.shape == dens.shape == (len(g),)


def test_virtual_pole_matches_direct():
    s = two_level()
    g = sphere_grid(8, 16)
    for t in (1.0, 1.4, 3.0, 21.0):
        assert fx.virtual_flux(s, t, g) == pytest.approx(fx.virtual_flux_direct(s, t, g), rel=1e-9, abs=1e-12)


def test_virtual_zero_at_arrival():
    assert fx.virtual_flux(two_level(), 1.0) == 0.0


def test_virtual_rejects_before_arrival():
    with pytest.raises(ValueError):
        fx.virtual_flux(two_level(), 0.5, radius=1.0)


def test_virtual_depends_on_retarded_time_only():
    s = two_level()
    g = sphere_grid(8, 16)
    assert fx.virtual_flux(s, 4.0, g, radius=1.0) == pytest.approx(fx.virtual_flux(s, 103.0, g, radius=100.0),
                                                                  rel=1e-13)


def test_running_average_approaches_asymptote():
    s = two_level()
    g = sphere_grid(8, 16)
    asym = fx.virtual_flux_asymptote(s, g)
    assert asym == pytest.approx(-1 / (6 * math.pi), rel=1e-12)
    far = fx.virtual_flux_average(s, 2000.0, g)
    assert far == pytest.approx(asym, rel=2e-2)


def test_prescription_asymptotes():
    s = two_level()
    p = fx.virtual_flux_asymptote(s)
    assert fx.virtual_flux_asymptote(s, prescription="retarded") == pytest.approx(2 * p)
    assert fx.virtual_flux_asymptote(s, prescription="advanced") == 0.0


def test_retarded_prescription_shifts_by_asymptote():
    s = two_level()
    g = sphere_grid(8, 16)
    d = fx.virtual_flux(s, 6.0, g, prescription="retarded") - fx.virtual_flux(s, 6.0, g)
    assert d == pytest.approx(fx.virtual_flux_asymptote(s, g), rel=1e-10)


def test_average_matches_sampled_series():
    s = two_level()
    g = sphere_grid(8, 16)
    T = 8.0
    direct = fx.time_average(lambda tr: fx.virtual_flux(s, 1.0 + tr, g), T, n_panels=64)
    assert direct == pytest.approx(fx.virtual_flux_average(s, T, g), rel=1e-6)


def test_time_average_series_and_errors():
    ts = np.linspace(0, 2, 201)
    assert fx.time_average((ts, 3 * ts**0), 2.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fx.time_average((ts, ts), 5.0)
    with pytest.raises(ValueError):
        fx.time_average(lambda t: t, 0.0)


def test_fit_decay_exponent():
    T = np.logspace(1, 2, 5)
    assert fx.fit_decay_exponent(T, 3 * T**-1.0) == pytest.approx(-1.0)


def test_density_breakdown_scaling():
    s = two_level()
    xhat = np.array([1.0, 0, 0])
    b1 = fx.density_breakdown(s, xhat, 1.0, [1.5, 3.0])
    b2 = fx.density_breakdown(s, xhat, 10.0, [10.5, 12.0])
    assert b2.first_order * 100 == pytest.approx(b1.first_order, rel=1e-14)
    assert np.allclose(b2.virtual * 100, b1.virtual, rtol=1e-12)


def test_flux_report_two_level():
    s = two_level()
    rep = fx.flux_report(s, [1.0, 2.0, 6.0], grid=sphere_grid(8, 16))
    assert rep.P_real == pytest.approx(rep.P_real_spectrum, rel=1e-12)
    assert rep.window == 5.0
    assert rep.time_average == pytest.approx(rep.P_real + rep.virtual_average)
    assert "cutoff_sensitivity" in rep.diagnostics


def test_parallel_map_order(monkeypatch):
    monkeypatch.setenv("DIPOLE_FLUX_THREADS", "4")
    assert fx.parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    monkeypatch.setenv("DIPOLE_FLUX_THREADS", "bogus")
    assert fx.thread_count() == 1


def test_exponential_regulator_changes_transient_only():
    from dipole_flux.quadrature import Regulator
    s = two_level()
    g = sphere_grid(8, 16)
    sharp = fx.default_spec(s)
    soft = sharp.with_(regulator=Regulator("exponential", 50.0))
    assert fx.virtual_flux(s, 2.0, g, soft) != fx.virtual_flux(s, 2.0, g, sharp)
    assert fx.virtual_flux(s, 2.0, g, soft) == pytest.approx(fx.virtual_flux_direct(s, 2.0, g, soft), rel=1e-8)


def test_virtual_envelope_decays():
    s = two_level()
    g = sphere_grid(8, 16)
    early = fx.virtual_flux_series(s, 1 + np.linspace(0, 10, 161), g).values
    late = fx.virtual_flux_series(s, 1 + np.linspace(50, 100, 401), g).values
    assert np.max(np.abs(late)) < np.max(np.abs(early))


def test_virtual_antisymmetric_in_transition_sign():
    from dipole_flux.spectrum import DipoleSpectrum, Level

    down = two_level()
    up = DipoleSpectrum(down.levels, {("e", "g"): [0, 0, 1]}, "g")
    g = sphere_grid(8, 16)
    spec = fx.default_spec(down)
    for t in (1.5, 4.0, 20.0):
        a = fx.virtual_flux(down, t, g, spec)
        assert fx.virtual_flux(up, t, g, spec) == pytest.approx(-a, rel=1e-13)
        assert fx.virtual_flux_direct(up, t, g, spec) == pytest.approx(-a, rel=1e-9)
