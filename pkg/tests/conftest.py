import math
import sys

import numpy as np
import pytest

from dipole_flux.spectrum import DipoleSpectrum, Level


def two_level(omega=1.0, d=(0.0, 0.0, 1.0)):
    return DipoleSpectrum([Level("g", 0.0), Level("e", omega)], {("e", "g"): np.asarray(d, complex)}, "e")


def random_spectrum(rng, n_levels=None, excited=None):
    """Random spectrum; every pair coupled, excited level chosen at random."""
    n = n_levels or int(rng.integers(3, 6))
    energies = np.sort(rng.uniform(0.0, 3.0, n))
    levels = [Level(f"L{k}", float(E)) for k, E in enumerate(energies)]
    dip = {}
    for i in range(n):
        for j in range(i + 1, n):
            dip[(f"L{j}", f"L{i}")] = rng.normal(size=3) + 1j * rng.normal(size=3)
    exc = excited if excited is not None else f"L{int(rng.integers(1, n))}"
    return DipoleSpectrum(levels, dip, exc)


def spontaneous_oracle(s):
    """Independent sum over downward transitions of omega^4 |d|^2 / (3 pi)."""
    tot = []
    e = s.excited
    for m in s.labels:
        if m == e:
            continue
        w = s.energy(e) - s.energy(m)
        d = s.dipole(e, m)
        if w > 0:
            tot.append(w**4 * float(np.sum(np.abs(d) ** 2)) / (3 * math.pi))
    return math.fsum(tot)


@pytest.fixture
def unit_two_level():
    return two_level()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
