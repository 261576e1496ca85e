"""Joint click statistics of the three threshold detectors in one context.

An outcome is the triple ``(a_i, a_next, a_anc)``: ``a = -1`` means the
detector of that observable clicked, ``+1`` that it did not; ``a_anc = 0``
means the ancilla detector clicked and ``1`` that it stayed dark.
Internally a distribution is a ``(2, 2, 2)`` array indexed by click flags in
mode order ``(A_i, A_{i+1}, anc)``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RangeError, TruncationError
from .network import MeasurementContext
from .states import (
    TAIL_BOUND,
    Coherent,
    Fock,
    Mixture,
    OpticalState,
    Thermal,
    TruncationWarning,
    photon_number_distribution,
)

Outcome = tuple[int, int, int]

# All eight outcomes, ordered by click flags (i, next, anc) as binary digits.
OUTCOMES: tuple[Outcome, ...] = tuple(
    (-1 if ci else 1, -1 if cn else 1, 0 if ca else 1)
    for ci, cn, ca in itertools.product((0, 1), repeat=3)
)


def outcome_to_flags(outcome: Outcome) -> tuple[int, int, int]:
    a_i, a_n, a_anc = outcome
    if a_i not in (-1, 1) or a_n not in (-1, 1) or a_anc not in (0, 1):
        raise KeyError(f"not an outcome: {outcome!r}")
    return int(a_i == -1), int(a_n == -1), int(a_anc == 0)


def flags_to_outcome(flags: tuple[int, int, int]) -> Outcome:
    ci, cn, ca = flags
    return (-1 if ci else 1, -1 if cn else 1, 0 if ca else 1)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the eight outcomes in one context.

    ``post_selection`` is the probability of the event the distribution was
    conditioned on (1 for an unconditioned distribution).
    """

    table: np.ndarray
    context: int = 0
    state: str = ""
    eta: float = 1.0
    event: str | None = None
    post_selection: float = 1.0

    def __post_init__(self):
        table = np.array(self.table, dtype=float).reshape(2, 2, 2)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        if np.any(table < 0):
            raise ValueError(f"negative outcome probability in {table.ravel()}")
        if abs(math.fsum(table.ravel()) - 1.0) > 1e-10:
            raise ValueError(f"outcome probabilities sum to {table.sum()}")

    def __getitem__(self, outcome: Outcome) -> float:
        return float(self.table[outcome_to_flags(outcome)])

    def items(self):
        for o in OUTCOMES:
            yield o, self[o]

    def as_dict(self) -> dict[Outcome, float]:
        return dict(self.items())

    def click_probability(self, mode: int) -> float:
        """Marginal click probability of mode 0 (A_i), 1 (A_{i+1}) or 2 (anc)."""
        return math.fsum(np.take(self.table, 1, axis=mode).ravel())

    @property
    def p_minus_i(self) -> float:
        """``P(A_i = -1)`` summed over the ancilla outcome."""
        return self.click_probability(0)

    @property
    def p_minus_next(self) -> float:
        return self.click_probability(1)

    @property
    def p_joint_minus(self) -> float:
        """``P(A_i = -1, A_{i+1} = -1)`` summed over the ancilla outcome."""
        return math.fsum(self.table[1, 1, :])

    def probability(self, outcomes) -> float:
        return math.fsum(self[o] for o in outcomes)


def _coherent_table(nbar: float, fractions, eta: float) -> np.ndarray:
    x = [eta * f * nbar for f in fractions]
    dark = [math.exp(-v) for v in x]
    click = [-math.expm1(-v) for v in x]
    table = np.empty((2, 2, 2))
    for flags in itertools.product((0, 1), repeat=3):
        table[flags] = math.prod(click[m] if c else dark[m] for m, c in enumerate(flags))
    return table


def fock_pattern_matrix(n_max: int, fractions, eta: float) -> np.ndarray:
    """Exact click-pattern probabilities for ``n = 0..n_max`` photons.

    Each photon independently ends up detected in mode ``j`` with probability
    ``eta f_j`` or undetected with ``1 - eta``. The probability that exactly
    the modes in ``C`` click is, by inclusion-exclusion over the subsets ``T``
    of ``C`` allowed to receive detected photons,
    ``sum_T (-1)^{|C|-|T|} (1 - eta + eta f_T)^n``; it vanishes for ``n < |C|``.

    Returns an array of shape ``(n_max + 1, 2, 2, 2)``.
    """
    n = np.arange(n_max + 1, dtype=float)
    out = np.zeros((n_max + 1, 2, 2, 2))
    for flags in itertools.product((0, 1), repeat=3):
        clicked = [m for m in range(3) if flags[m]]
        acc = np.zeros(n_max + 1)
        for r in range(len(clicked) + 1):
            for allowed in itertools.combinations(clicked, r):
                base = (1.0 - eta) + eta * math.fsum(fractions[m] for m in allowed)
                sign = -1.0 if (len(clicked) - r) % 2 else 1.0
                acc = acc + sign * np.power(base, n)
        acc[n < len(clicked)] = 0.0
        out[(slice(None),) + flags] = np.clip(acc, 0.0, None)
    return out


def number_basis_table(probs: np.ndarray, fractions, eta: float) -> np.ndarray:
    """Average the Fock click patterns over a photon-number distribution."""
    probs = np.asarray(probs, dtype=float)
    patterns = fock_pattern_matrix(len(probs) - 1, fractions, eta)
    table = np.empty((2, 2, 2))
    for flags in itertools.product((0, 1), repeat=3):
        table[flags] = math.fsum(probs * patterns[(slice(None),) + flags])
    return table


def _number_basis_component(state: OpticalState, fractions, eta, n_max, tail_bound) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        pnd = photon_number_distribution(state, n_max, tail_bound)
    if pnd.tail_mass > tail_bound:
        raise TruncationError(pnd.tail_mass, tail_bound, pnd.n_max)
    table = number_basis_table(pnd.probs, fractions, eta)
    # renormalize away the (sub-bound) truncated tail
    return table / math.fsum(table.ravel())


def _table(state, fractions, eta, n_max, tail_bound) -> np.ndarray:
    if isinstance(state, Coherent):
        return _coherent_table(state.nbar, fractions, eta)
    if isinstance(state, Fock):
        return number_basis_table(np.eye(state.n + 1)[state.n], fractions, eta)
    if isinstance(state, Thermal):
        return _number_basis_component(state, fractions, eta, n_max, tail_bound)
    if isinstance(state, Mixture):
        tables = [_table(s, fractions, eta, n_max, tail_bound) for s in state.components]
        out = np.empty((2, 2, 2))
        for flags in itertools.product((0, 1), repeat=3):
            out[flags] = math.fsum(w * t[flags] for w, t in zip(state.weights, tables))
        return out
    raise TypeError(f"not an optical state: {state!r}")


def joint_distribution(
    state: OpticalState,
    ctx: MeasurementContext,
    eta: float = 1.0,
    n_max: int | None = None,
    tail_bound: float = TAIL_BOUND,
) -> OutcomeDistribution:
    """Exact joint outcome distribution of ``state`` in context ``ctx``.

    Coherent inputs split into independent coherent states, so the joint
    distribution is a product of per-mode click probabilities
    ``1 - exp(-eta f |alpha|^2)``. Fock inputs are placed multinomially over
    the three modes; thermal inputs (and any non-coherent mixture component)
    are expanded in the number basis of the single input mode, which keeps the
    classical correlations between the output modes.

    Raises:
        TruncationError: the number-basis expansion of a thermal component
            leaves a tail larger than ``tail_bound``.
    """
    if not 0.0 <= eta <= 1.0:
        raise RangeError(f"detection efficiency must lie in [0, 1], got {eta}")
    table = _table(state, ctx.split_fractions, eta, n_max, tail_bound)
    return OutcomeDistribution(table, context=ctx.index, state=repr(state), eta=eta)


def joint_distribution_number_basis(
    state: OpticalState,
    ctx: MeasurementContext,
    eta: float = 1.0,
    n_max: int | None = None,
    tail_bound: float = TAIL_BOUND,
) -> OutcomeDistribution:
    """Like :func:`joint_distribution` but expanding every state, coherent ones
    included, in the number basis."""
    if not 0.0 <= eta <= 1.0:
        raise RangeError(f"detection efficiency must lie in [0, 1], got {eta}")
    table = _number_basis_component(state, ctx.split_fractions, eta, n_max, tail_bound)
    return OutcomeDistribution(table, context=ctx.index, state=repr(state), eta=eta)


def verify_coherent_factorization(
    alpha, ctx: MeasurementContext, eta: float = 1.0, tol: float = 1e-8
) -> bool:
    """Check that the number-basis expansion of a coherent input reproduces
    the product of independent per-mode click probabilities."""
    state = alpha if isinstance(alpha, Coherent) else Coherent(alpha)
    product = _coherent_table(state.nbar, ctx.split_fractions, eta)
    expanded = joint_distribution_number_basis(state, ctx, eta).table
    return bool(np.max(np.abs(product - expanded)) <= tol)
