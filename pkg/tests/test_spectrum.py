import json
import math

import numpy as np
import pytest

from dipole_flux.spectrum import (
    DipoleSpectrum,
    Level,
    SpectrumError,
    emission_lines,
    gamma_rate,
    load,
    real_flux,
    validate,
)

from conftest import random_spectrum, spontaneous_oracle, two_level


def test_two_level_rate():
    s = two_level()
    (line,) = emission_lines(s)
    assert line.gamma == pytest.approx(1 / (3 * math.pi), rel=1e-15)
    assert line.power == pytest.approx(1 / (3 * math.pi), rel=1e-15)


def test_rate_scales_with_omega_cubed():
    for w in (0.5, 2.0, 7.0):
        assert gamma_rate(two_level(w).transition("e", "g")) == pytest.approx(w**3 / (3 * math.pi), rel=1e-14)


def test_degenerate_rate_zero():
    s = DipoleSpectrum([Level("a", 1.0), Level("b", 1.0)], {("a", "b"): [1, 0, 0]}, "a")
    assert gamma_rate(s.transition("a", "b")) == 0.0


def test_upward_rate_rejected():
    s = two_level()
    with pytest.raises(SpectrumError):
        gamma_rate(s.transition("g", "e"))


def test_hermiticity_enforced():
    with pytest.raises(SpectrumError, match="Hermitian"):
        DipoleSpectrum([Level("g", 0), Level("e", 1)], {("e", "g"): [1j, 0, 0], ("g", "e"): [1j, 0, 0]}, "e")
    s = DipoleSpectrum([Level("g", 0), Level("e", 1)], {("e", "g"): [1j, 0, 0], ("g", "e"): [-1j, 0, 0]}, "e")
    assert np.allclose(s.dipole("g", "e"), np.conj(s.dipole("e", "g")))


def test_conjugate_partner_derived():
    s = DipoleSpectrum([Level("g", 0), Level("e", 1)], {("e", "g"): [1, 2j, 0]}, "e")
    assert np.array_equal(s.dipole("g", "e"), np.array([1, -2j, 0]))


@pytest.mark.parametrize(
    "raw, msg",
    [
        ({"levels": [{"label": "a", "energy": 0}, {"label": "a", "energy": 1}], "excited": "a"}, "duplicate"),
        ({"levels": [{"label": "a", "energy": 0}], "excited": "b"}, "not a defined"),
        ({"levels": [{"label": "a", "energy": 0}], "excited": "a",
          "dipoles": [{"from": "a", "to": "z", "re": [1, 0, 0]}]}, "unknown level"),
        ({"levels": [{"label": "a", "energy": 0}], "excited": "a",
          "dipoles": [{"from": "a", "to": "a", "re": [1, 0]}]}, "3 components"),
        ({"excited": "a"}, "missing key"),
    ],
)
def test_validate_errors(raw, msg):
    with pytest.raises(SpectrumError, match=msg):
        validate(raw)


def test_round_trip_dict(tmp_path, rng):
    s = random_spectrum(rng)
    p = tmp_path / "s.json"
    p.write_text(json.dumps(s.to_dict()))
    s2 = load(p)
    assert s2.to_dict() == s.to_dict()


def test_real_flux_matches_oracle(rng):
    for _ in range(20):
        s = random_spectrum(rng)
        assert real_flux(s).total == pytest.approx(spontaneous_oracle(s), rel=1e-13)


def test_shift_invariance(rng):
    s = random_spectrum(rng)
    assert real_flux(s.shifted(3.7)).total == pytest.approx(real_flux(s).total, rel=1e-12)


def test_ground_state_does_not_radiate():
    s = DipoleSpectrum([Level("g", 0), Level("e", 1)], {("e", "g"): [0, 0, 1]}, "g")
    assert real_flux(s).total == 0.0


def test_dipole_arrays_read_only():
    s = two_level()
    with pytest.raises(ValueError):
        s.dipole("e", "g")[0] = 5
