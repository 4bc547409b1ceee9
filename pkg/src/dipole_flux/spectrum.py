"""Bare dipole spectrum, transition data and spontaneous-emission rates.

Natural units are used throughout (hbar = c = eps0 = 1).  A spectrum is a
set of labelled levels with energies, a sparse Hermitian map of dipole
matrix elements and a designated excited level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

HERMITICITY_RTOL = 1e-12


class SpectrumError(ValueError):
    """Raised for malformed or physically inconsistent spectrum data."""


@dataclass(frozen=True)
class Level:
    label: str
    energy: float


@dataclass(frozen=True)
class Transition:
    """Directed transition ``source -> target`` with ``omega = E_source - E_target``."""

    source: str
    target: str
    omega: float
    dipole: np.ndarray = field(repr=False)

    @property
    def dipole_norm2(self) -> float:
        return float(np.vdot(self.dipole, self.dipole).real)


def _as_vec3(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.shape != (3,):
        raise SpectrumError(f"{what}: expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpectrumError(f"{what}: non-finite component")
    return arr


class DipoleSpectrum:
    """Validated, immutable dipole spectrum.

    Parameters
    ----------
    levels : iterable of Level
        Ordered bare levels.  Labels must be unique.
    dipoles : mapping
        ``(n, m) -> d_nm`` for any subset of ordered pairs.  Missing
        conjugate partners are derived from Hermiticity.
    excited : str
        Label of the initially excited level.
    """

    def __init__(self, levels: Iterable[Level], dipoles: Mapping, excited: str):
        levels = tuple(levels)
        labels = [lv.label for lv in levels]
        if len(set(labels)) != len(labels):
            dup = sorted({x for x in labels if labels.count(x) > 1})
            raise SpectrumError(f"duplicate level labels: {dup}")
        for lv in levels:
            if not math.isfinite(lv.energy):
                raise SpectrumError(f"level {lv.label!r}: energy must be finite")
        if excited not in labels:
            raise SpectrumError(f"excited level {excited!r} is not a defined level")

        index = set(labels)
        full: dict[tuple[str, str], np.ndarray] = {}
        for (n, m), d in dipoles.items():
            for lab in (n, m):
                if lab not in index:
                    raise SpectrumError(f"dipole ({n!r},{m!r}) references unknown level {lab!r}")
            d = _as_vec3(d, f"dipole ({n!r},{m!r})")
            partner = full.get((m, n))
            if partner is not None or (m, n) in dipoles:
                other = partner if partner is not None else _as_vec3(dipoles[(m, n)], "dipole")
                scale = max(np.linalg.norm(d), np.linalg.norm(other), 1e-300)
                if np.linalg.norm(d - np.conj(other)) > HERMITICITY_RTOL * scale:
                    raise SpectrumError(
                        f"non-Hermitian dipole pair: d[{n},{m}] != conj(d[{m},{n}])"
                    )
            full[(n, m)] = d
            full[(m, n)] = np.conj(d)
        for d in full.values():
            d.setflags(write=False)

        self._levels = levels
        self._energy = {lv.label: float(lv.energy) for lv in levels}
        self._dipoles = full
        self._excited = excited

    @property
    def levels(self) -> tuple[Level, ...]:
        return self._levels

    @property
    def excited(self) -> str:
        return self._excited

    @property
    def labels(self) -> list[str]:
        return [lv.label for lv in self._levels]

    def energy(self, label: str) -> float:
        return self._energy[label]

    def dipole(self, n: str, m: str) -> np.ndarray:
        """``d_nm``; zero if the pair carries no stored element."""
        d = self._dipoles.get((n, m))
        return d if d is not None else np.zeros(3, dtype=complex)

    def transitions(self) -> list[Transition]:
        """All directed transitions ``n -> m`` (n != m) with a stored dipole element."""
        out = []
        for n in self.labels:
            for m in self.labels:
                if n != m and (n, m) in self._dipoles:
                    out.append(self.transition(n, m))
        return out

    def transition(self, n: str, m: str) -> Transition:
        return Transition(n, m, self._energy[n] - self._energy[m], self.dipole(n, m))

    def from_excited(self) -> list[Transition]:
        """Every ``e -> m`` with m != e that has a stored element, in level order."""
        e = self._excited
        return [self.transition(e, m) for m in self.labels if m != e and (e, m) in self._dipoles]

    def shifted(self, offset: float) -> "DipoleSpectrum":
        levels = [Level(lv.label, lv.energy + offset) for lv in self._levels]
        return DipoleSpectrum(levels, self._upper_triangle(), self._excited)

    def _upper_triangle(self) -> dict:
        seen = {}
        for (n, m), d in self._dipoles.items():
            if (m, n) not in seen:
                seen[(n, m)] = d
        return seen

    def to_dict(self) -> dict:
        dip = [
            {"from": n, "to": m, "re": d.real.tolist(), "im": d.imag.tolist()}
            for (n, m), d in self._upper_triangle().items()
        ]
        return {
            "levels": [{"label": lv.label, "energy": float(lv.energy)} for lv in self._levels],
            "dipoles": dip,
            "excited": self._excited,
        }

    def __repr__(self):
        return f"DipoleSpectrum(levels={len(self._levels)}, excited={self._excited!r})"


def validate(raw: Mapping) -> DipoleSpectrum:
    """Build a :class:`DipoleSpectrum` from the JSON document layout.

    ``{"levels": [{"label", "energy"}], "dipoles": [{"from", "to", "re", "im"}],
    "excited": label}``.  ``im`` may be omitted for real elements.  Stating
    both ``(n, m)`` and ``(m, n)`` is allowed only if they are Hermitian
    conjugates.
    """
    try:
        levels = [Level(str(lv["label"]), float(lv["energy"])) for lv in raw["levels"]]
        dipoles: dict[tuple[str, str], np.ndarray] = {}
        for k, item in enumerate(raw.get("dipoles", [])):
            key = (str(item["from"]), str(item["to"]))
            re = np.asarray(item["re"], dtype=float)
            im = np.asarray(item.get("im", [0.0, 0.0, 0.0]), dtype=float)
            if re.shape != (3,) or im.shape != (3,):
                raise SpectrumError(f"dipoles[{k}]: 're' and 'im' must have 3 components")
            if key in dipoles:
                raise SpectrumError(f"dipoles[{k}]: pair {key} given twice")
            dipoles[key] = re + 1j * im
        excited = str(raw["excited"])
    except KeyError as exc:
        raise SpectrumError(f"missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpectrumError):
            raise
        raise SpectrumError(str(exc)) from None
    return DipoleSpectrum(levels, dipoles, excited)


def load(path) -> DipoleSpectrum:
    with open(path) as fh:
        return validate(json.load(fh))


def gamma_rate(t: Transition) -> float:
    """Spontaneous emission rate ``omega^3 |d|^2 / (3 pi)`` of a downward transition.

    A degenerate transition (omega == 0) has rate 0.  Upward transitions are
    rejected.
    """
    if t.omega < 0:
        raise SpectrumError(
            f"gamma_rate needs a downward transition, got omega={t.omega} for {t.source}->{t.target}"
        )
    return t.omega**3 * t.dipole_norm2 / (3.0 * math.pi)


@dataclass(frozen=True)
class EmissionLine:
    source: str
    target: str
    omega: float
    gamma: float

    @property
    def power(self) -> float:
        return self.gamma * self.omega


@dataclass(frozen=True)
class RealFlux:
    total: float
    lines: tuple[EmissionLine, ...]


def emission_lines(s: DipoleSpectrum) -> list[EmissionLine]:
    return [
        EmissionLine(t.source, t.target, t.omega, gamma_rate(t))
        for t in s.from_excited()
        if t.omega >= 0
    ]


def real_flux(s: DipoleSpectrum) -> RealFlux:
    """Total real radiated power ``sum_{m<e} Gamma_{e->m} omega_em``."""
    lines = tuple(emission_lines(s))
    total = math.fsum(ln.power for ln in lines)
    return RealFlux(total, lines)
