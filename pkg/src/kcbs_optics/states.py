"""Single-mode input states, their photon-number statistics and loss.

Everything downstream depends on a state only through its photon-number
distribution (threshold detection behind a passive network is phase blind),
so a state here is a small immutable record and not a density matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import InvalidStateError, RangeError

TAIL_BOUND = 1e-12
N_MAX_CAP = 200
WEIGHT_TOLERANCE = 1e-9


class TruncationWarning(UserWarning):
    """A photon-number distribution was truncated with a large tail."""


@dataclass(frozen=True)
class Coherent:
    """Coherent state |alpha>. Only ``|alpha|^2`` enters any click probability."""

    alpha: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not (math.isfinite(self.alpha.real) and math.isfinite(self.alpha.imag)):
            raise InvalidStateError(f"non-finite amplitude {self.alpha}")

    @classmethod
    def from_nbar(cls, nbar: float, phase: float = 0.0) -> "Coherent":
        if nbar < 0:
            raise InvalidStateError(f"mean photon number must be >= 0, got {nbar}")
        return cls(math.sqrt(nbar) * complex(math.cos(phase), math.sin(phase)))

    @property
    def nbar(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class Fock:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise InvalidStateError(f"photon number must be a non-negative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class Thermal:
    nbar: float

    def __post_init__(self):
        if not math.isfinite(self.nbar) or self.nbar < 0:
            raise InvalidStateError(f"thermal mean photon number must be >= 0, got {self.nbar}")
        object.__setattr__(self, "nbar", float(self.nbar))


@dataclass(frozen=True)
class Mixture:
    """Convex combination of non-mixture states.

    Nested mixtures are flattened and the weights renormalized; weights must
    already sum to one within ``WEIGHT_TOLERANCE``.
    """

    parts: tuple[tuple[float, "OpticalState"], ...] = field(default=())

    def __post_init__(self):
        flat: list[tuple[float, OpticalState]] = []
        for w, s in self.parts:
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise InvalidStateError(f"mixture weight must be >= 0, got {w}")
            if isinstance(s, Mixture):
                flat.extend((w * ws, sub) for ws, sub in s.parts)
            elif isinstance(s, (Coherent, Fock, Thermal)):
                flat.append((w, s))
            else:
                raise InvalidStateError(f"not an optical state: {s!r}")
        if not flat:
            raise InvalidStateError("empty mixture")
        total = math.fsum(w for w, _ in flat)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise InvalidStateError(f"mixture weights sum to {total}, expected 1")
        object.__setattr__(self, "parts", tuple((w / total, s) for w, s in flat))

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for w, _ in self.parts)

    @property
    def components(self) -> tuple["OpticalState", ...]:
        return tuple(s for _, s in self.parts)


OpticalState = Union[Coherent, Fock, Thermal, Mixture]


def mixture(parts) -> OpticalState:
    """Build a mixture, dropping zero weights and collapsing a single component."""
    kept = [(w, s) for w, s in parts if w > 0]
    if len(kept) == 1:
        return kept[0][1]
    return Mixture(tuple(kept))


@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Truncated photon-number distribution; ``probs[n]`` for ``n <= n_max``."""

    probs: np.ndarray
    n_max: int
    tail_mass: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.n_max + 1,):
            raise ValueError("probs must have n_max + 1 entries")
        if np.any(probs < 0) or self.tail_mass < 0:
            raise ValueError("negative probability")
        if abs(math.fsum(probs) + self.tail_mass - 1.0) > 1e-10:
            raise ValueError("probabilities and tail do not sum to one")

    @property
    def mean(self) -> float:
        """Mean of the truncated part (exact when ``tail_mass`` is 0)."""
        return math.fsum(np.arange(self.n_max + 1) * self.probs)


def _poisson(mean: float, n_max: int) -> tuple[np.ndarray, float]:
    n = np.arange(n_max + 1)
    if mean == 0:
        probs = (n == 0).astype(float)
        return probs, 0.0
    probs = np.exp(n * math.log(mean) - mean - gammaln(n + 1))
    return probs, float(stats.poisson.sf(n_max, mean))


def _geometric(mean: float, n_max: int) -> tuple[np.ndarray, float]:
    n = np.arange(n_max + 1)
    if mean == 0:
        return (n == 0).astype(float), 0.0
    ratio = mean / (1.0 + mean)
    probs = ratio**n / (1.0 + mean)
    return probs, ratio ** (n_max + 1)


def _component_distribution(state: OpticalState, n_max: int) -> tuple[np.ndarray, float]:
    if isinstance(state, Coherent):
        return _poisson(state.nbar, n_max)
    if isinstance(state, Thermal):
        return _geometric(state.nbar, n_max)
    if isinstance(state, Fock):
        probs = np.zeros(n_max + 1)
        if state.n <= n_max:
            probs[state.n] = 1.0
            return probs, 0.0
        return probs, 1.0
    if isinstance(state, Mixture):
        probs = np.zeros(n_max + 1)
        tail = 0.0
        for w, s in state.parts:
            p, t = _component_distribution(s, n_max)
            probs += w * p
            tail += w * t
        return probs, tail
    raise InvalidStateError(f"not an optical state: {state!r}")


def default_n_max(state: OpticalState, tail_bound: float = TAIL_BOUND, cap: int = N_MAX_CAP) -> int:
    """Smallest truncation with tail below ``tail_bound``, capped at ``cap``."""
    if isinstance(state, Fock):
        return state.n
    if isinstance(state, Coherent):
        if state.nbar == 0:
            return 0
        sf = stats.poisson.sf(np.arange(cap + 1), state.nbar)
        below = np.nonzero(sf < tail_bound)[0]
        return int(below[0]) if below.size else cap
    if isinstance(state, Thermal):
        if state.nbar == 0:
            return 0
        ratio = state.nbar / (1.0 + state.nbar)
        n = math.ceil(math.log(tail_bound) / math.log(ratio)) - 1
        return min(max(n, 0), cap)
    if isinstance(state, Mixture):
        return max(default_n_max(s, tail_bound, cap) for s in state.components)
    raise InvalidStateError(f"not an optical state: {state!r}")


def photon_number_distribution(
    state: OpticalState, n_max: int | None = None, tail_bound: float = TAIL_BOUND
) -> PhotonNumberDistribution:
    """Photon-number distribution of ``state`` truncated at ``n_max``.

    Coherent states are Poissonian, thermal states geometric, Fock states a point
    mass and mixtures the weighted sum. ``tail_mass`` is the probability of more
    than ``n_max`` photons; a :class:`TruncationWarning` is issued when it exceeds
    ``tail_bound``.
    """
    if n_max is None:
        n_max = default_n_max(state, tail_bound)
    if n_max < 0:
        raise RangeError(f"n_max must be >= 0, got {n_max}")
    probs, tail = _component_distribution(state, n_max)
    tail = max(float(tail), 0.0)
    if tail > tail_bound:
        warnings.warn(
            f"photon-number tail {tail:.3e} beyond N_max={n_max} exceeds {tail_bound:.1e}",
            TruncationWarning,
            stacklevel=2,
        )
    return PhotonNumberDistribution(probs, n_max, tail)


def mean_photon_number(state: OpticalState) -> float:
    if isinstance(state, Coherent):
        return state.nbar
    if isinstance(state, Thermal):
        return state.nbar
    if isinstance(state, Fock):
        return float(state.n)
    if isinstance(state, Mixture):
        return math.fsum(w * mean_photon_number(s) for w, s in state.parts)
    raise InvalidStateError(f"not an optical state: {state!r}")


def apply_loss(state: OpticalState, eta: float) -> OpticalState:
    """Send ``state`` through a beam splitter of transmissivity ``eta``.

    Coherent and thermal states stay in their family; a Fock state becomes a
    finite mixture of Fock states with binomial weights.
    """
    if not 0.0 <= eta <= 1.0:
        raise RangeError(f"transmissivity must lie in [0, 1], got {eta}")
    if isinstance(state, Coherent):
        return Coherent(math.sqrt(eta) * state.alpha)
    if isinstance(state, Thermal):
        return Thermal(eta * state.nbar)
    if isinstance(state, Fock):
        # direct binomial weights; scipy's pmf overflows for subnormal eta
        n = state.n
        weights = [math.comb(n, k) * eta**k * (1.0 - eta) ** (n - k) for k in range(n + 1)]
        return mixture([(w, Fock(k)) for k, w in enumerate(weights)])
    if isinstance(state, Mixture):
        return mixture([(w, apply_loss(s, eta)) for w, s in state.parts])
    raise InvalidStateError(f"not an optical state: {state!r}")


def vacuum_removed_coherent(nbar: float, tail_bound: float = TAIL_BOUND) -> Mixture:
    """Number-diagonal part of a coherent state with its vacuum projected out.

    The result is a mixture of Fock states with weights
    ``Poisson(n; nbar) / (1 - exp(-nbar))`` for ``n >= 1``; off-diagonal
    coherences are dropped because threshold clicks behind a passive network
    never see them.
    """
    if not nbar > 0:
        raise InvalidStateError(f"vacuum removal needs nbar > 0, got {nbar}")
    n_max = max(default_n_max(Coherent.from_nbar(nbar), tail_bound), 1)
    probs, _ = _poisson(nbar, n_max)
    norm = -math.expm1(-nbar)
    return Mixture(tuple((p / norm, Fock(n)) for n, p in enumerate(probs) if n >= 1 and p > 0))


def from_record(record: Mapping[str, Any]) -> OpticalState:
    """Build a state from a tagged record such as ``{"kind": "coherent", "nbar": 0.4}``.

    Recognized kinds: ``coherent`` (``nbar`` or ``alpha``), ``fock`` (``n``),
    ``thermal`` (``nbar``), ``vacuum``, and ``mixture`` (``parts``: list of
    records each carrying a weight ``w``).
    """
    if not isinstance(record, Mapping) or "kind" not in record:
        raise InvalidStateError(f"state record needs a 'kind' field: {record!r}")
    kind = str(record["kind"]).lower()
    try:
        if kind == "coherent":
            if "alpha" in record:
                return Coherent(complex(record["alpha"]))
            return Coherent.from_nbar(float(record["nbar"]), float(record.get("phase", 0.0)))
        if kind == "fock":
            return Fock(int(record["n"]))
        if kind == "vacuum":
            return Fock(0)
        if kind == "thermal":
            return Thermal(float(record["nbar"]))
        if kind == "mixture":
            parts = []
            for sub in record["parts"]:
                sub = dict(sub)
                w = float(sub.pop("w"))
                parts.append((w, from_record(sub)))
            return Mixture(tuple(parts))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidStateError):
            raise
        raise InvalidStateError(f"bad {kind} record {dict(record)!r}: {exc}") from exc
    raise InvalidStateError(f"unknown state kind {kind!r}")


def to_record(state: OpticalState) -> dict[str, Any]:
    if isinstance(state, Coherent):
        return {"kind": "coherent", "nbar": state.nbar}
    if isinstance(state, Fock):
        return {"kind": "fock", "n": state.n}
    if isinstance(state, Thermal):
        return {"kind": "thermal", "nbar": state.nbar}
    if isinstance(state, Mixture):
        return {"kind": "mixture", "parts": [{"w": w, **to_record(s)} for w, s in state.parts]}
    raise InvalidStateError(f"not an optical state: {state!r}")
