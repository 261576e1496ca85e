"""KCBS pentagon geometry and the five three-mode measurement contexts.

Context ``i`` jointly measures ``A_i`` and ``A_{i+1}`` (cyclic, so context 5 is
``{A_5, A_1}``). The input photon sits in mode ``(0, 0, 1)``; the fraction of
intensity reaching the detector of ``A_i`` is the squared overlap with the
measurement vector of ``A_i``, and whatever reaches neither lands on the
ancilla detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RangeError

N_CONTEXTS = 5
SQRT5 = math.sqrt(5.0)
QUANTUM_BOUND = 5.0 - 4.0 * SQRT5
CLASSICAL_BOUND = -3.0

# (detector of A_i, detector of A_{i+1}, ancilla detector) per context.
SETTING_ROLES: dict[int, tuple[int, int, int]] = {
    1: (2, 3, 1),
    2: (3, 1, 2),
    3: (1, 2, 3),
    4: (2, 3, 1),
    5: (3, 2, 1),
}


def _check_index(i: int) -> None:
    if i not in range(1, N_CONTEXTS + 1):
        raise RangeError(f"context/observable index must be in 1..5, got {i}")


def next_index(i: int) -> int:
    return i % N_CONTEXTS + 1


def measurement_vector(i: int) -> np.ndarray:
    """Unit vector ``c_i (cos(4 pi i/5), sin(4 pi i/5), sqrt(cos(pi/5)))``."""
    _check_index(i)
    angle = 4.0 * math.pi * i / 5.0
    raw = np.array([math.cos(angle), math.sin(angle), math.sqrt(math.cos(math.pi / 5.0))])
    c = 1.0 / math.sqrt(1.0 + math.cos(math.pi / 5.0))
    return c * raw


def single_photon_click_probability(i: int) -> float:
    """``<psi|P_i|psi>`` for the input photon ``psi = (0, 0, 1)``."""
    return float(measurement_vector(i)[2] ** 2)


@dataclass(frozen=True)
class MeasurementContext:
    """One context ``{A_i, A_{i+1}}``.

    ``split_fractions`` are the intensity fractions sent to the modes of
    ``A_i``, ``A_{i+1}`` and the ancilla; ``roles`` names the detector (1, 2
    or 3) that watches each of those modes.
    """

    index: int
    split_fractions: tuple[float, float, float]
    roles: tuple[int, int, int]

    def __post_init__(self):
        _check_index(self.index)
        fr = tuple(float(f) for f in self.split_fractions)
        if len(fr) != 3 or any(f < 0 for f in fr) or abs(math.fsum(fr) - 1.0) > 1e-12:
            raise RangeError(f"split fractions must be 3 non-negative reals summing to 1, got {fr}")
        if sorted(self.roles) != [1, 2, 3]:
            raise RangeError(f"detector roles must be a permutation of (1, 2, 3), got {self.roles}")
        object.__setattr__(self, "split_fractions", fr)
        object.__setattr__(self, "roles", tuple(int(r) for r in self.roles))

    @property
    def observables(self) -> tuple[int, int]:
        return self.index, next_index(self.index)

    @property
    def detector_roles(self) -> dict[str, int]:
        a, b = self.observables
        return {f"A{a}": self.roles[0], f"A{b}": self.roles[1], "anc": self.roles[2]}

    def mode_of_detector(self, detector: int) -> int:
        return self.roles.index(detector)

    @property
    def is_ideal(self) -> bool:
        return all(abs(f - g) <= 1e-12 for f, g in zip(self.split_fractions, IDEAL_FRACTIONS))


def _ideal_fractions() -> tuple[float, float, float]:
    f = single_photon_click_probability(1)
    return (f, f, 1.0 - 2.0 * f)


IDEAL_FRACTIONS = _ideal_fractions()


def context(i: int, roles: tuple[int, int, int] | None = None) -> MeasurementContext:
    """Ideal context ``{A_i, A_{i+1}}`` with the setting's detector assignment."""
    _check_index(i)
    return MeasurementContext(i, IDEAL_FRACTIONS, roles or SETTING_ROLES[i])


def perturbed_context(
    i: int, split_fractions: tuple[float, float, float], roles: tuple[int, int, int] | None = None
) -> MeasurementContext:
    """Context with explicit (e.g. misaligned) split fractions."""
    _check_index(i)
    return MeasurementContext(i, tuple(split_fractions), roles or SETTING_ROLES[i])


def all_contexts() -> list[MeasurementContext]:
    return [context(i) for i in range(1, N_CONTEXTS + 1)]
