"""Measurement events, conditioning and the KCBS parameter.

Three rules decide which triggered trials count:

* ``E1``: exactly one of the three detectors clicks,
* ``E2``: at least one detector clicks,
* ``E3``: every triggered trial (no post-selection).

``beta`` is the sum of the five context correlations; non-contextual models
obey ``beta >= -3`` and quantum theory reaches ``5 - 4 sqrt(5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clicks import OUTCOMES, Outcome, OutcomeDistribution, joint_distribution, outcome_to_flags
from .errors import RangeError, UndefinedConditioningError, UndefinedEstimateError
from .network import CLASSICAL_BOUND, N_CONTEXTS, QUANTUM_BOUND, SQRT5, MeasurementContext, all_contexts
from .states import OpticalState


@dataclass(frozen=True)
class EventDefinition:
    id: str
    outcomes: frozenset

    def __contains__(self, outcome: Outcome) -> bool:
        return outcome in self.outcomes

    def mask(self) -> np.ndarray:
        m = np.zeros((2, 2, 2), dtype=bool)
        for o in self.outcomes:
            m[outcome_to_flags(o)] = True
        return m

    def __str__(self) -> str:
        return self.id


def _n_clicks(o: Outcome) -> int:
    return sum(outcome_to_flags(o))


E1 = EventDefinition("E1", frozenset(o for o in OUTCOMES if _n_clicks(o) == 1))
E2 = EventDefinition("E2", frozenset(o for o in OUTCOMES if _n_clicks(o) >= 1))
E3 = EventDefinition("E3", frozenset(OUTCOMES))
EVENTS = {"E1": E1, "E2": E2, "E3": E3}

# beta(alpha|E1) as |alpha| -> 0; the closed form itself is 0/0 at the origin.
BETA_E1_VACUUM_LIMIT = QUANTUM_BOUND


def event(name) -> EventDefinition:
    """Look up ``"e1"``, ``"E2"``, ... (an :class:`EventDefinition` passes through)."""
    if isinstance(name, EventDefinition):
        return name
    try:
        return EVENTS[str(name).upper()]
    except KeyError:
        raise RangeError(f"unknown measurement event {name!r}; expected E1, E2 or E3") from None


def condition(dist: OutcomeDistribution, ev: EventDefinition) -> OutcomeDistribution:
    """Restrict ``dist`` to the outcomes of ``ev`` and renormalize.

    The returned distribution records ``P(ev)`` (relative to ``dist``) as
    ``post_selection``.
    """
    mask = ev.mask()
    kept = np.where(mask, dist.table, 0.0)
    p_ev = math.fsum(kept.ravel())
    if not p_ev > 0:
        raise UndefinedConditioningError(
            f"event {ev.id} has probability zero in context {dist.context}"
        )
    return OutcomeDistribution(
        kept / p_ev,
        context=dist.context,
        state=dist.state,
        eta=dist.eta,
        event=ev.id,
        post_selection=p_ev * dist.post_selection,
    )


def correlation_from_probabilities(p_i: float, p_next: float, p_joint: float) -> float:
    """``<A_i A_{i+1}> = 1 + 4 P(-1,-1) - 2 P(A_i=-1) - 2 P(A_{i+1}=-1)``."""
    return 1.0 + 4.0 * p_joint - 2.0 * p_i - 2.0 * p_next


def correlation(dist: OutcomeDistribution) -> float:
    """Correlation ``<A_i A_{i+1}>`` of a normalized distribution.

    Computed as the signed sum over the four ``(a_i, a_{i+1})`` outcomes and
    cross-checked against the marginal form.
    """
    t = dist.table.sum(axis=2)
    signed = math.fsum([t[0, 0], t[1, 1], -t[0, 1], -t[1, 0]])
    marginal = correlation_from_probabilities(dist.p_minus_i, dist.p_minus_next, dist.p_joint_minus)
    if abs(signed - marginal) > 1e-12:
        raise ArithmeticError(f"correlation forms disagree: {signed} vs {marginal}")
    return signed


def g_correlation(dist: OutcomeDistribution) -> float:
    """``g = P(-1,-1) / (P(A_i=-1) P(A_{i+1}=-1))``."""
    pi, pn = dist.p_minus_i, dist.p_minus_next
    if pi <= 0 or pn <= 0:
        raise UndefinedEstimateError("g is undefined when a click marginal vanishes")
    return dist.p_joint_minus / (pi * pn)


def corrected_bound(
    p_a1_minus: float, p_flip_given_minus: float, p_a1_plus: float, p_flip_given_plus: float
) -> float:
    """Non-contextual bound ``-3 - eps`` for a shared observable that is not
    perfectly repeatable between its two contexts.

    ``eps = 2 [P(A1'=-1 | A1=+1) P(A1=+1) + P(A1'=+1 | A1=-1) P(A1=-1)]``.

    Args:
        p_a1_minus: ``P(A1 = -1)``.
        p_flip_given_minus: ``P(A1' = +1 | A1 = -1)``.
        p_a1_plus: ``P(A1 = +1)``.
        p_flip_given_plus: ``P(A1' = -1 | A1 = +1)``.
    """
    for p in (p_a1_minus, p_flip_given_minus, p_a1_plus, p_flip_given_plus):
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"probability outside [0, 1]: {p}")
    eps = 2.0 * (p_flip_given_plus * p_a1_plus + p_flip_given_minus * p_a1_minus)
    return CLASSICAL_BOUND - eps


def efficiency_threshold(bound: float = CLASSICAL_BOUND) -> float:
    """Heralding efficiency at which an ideal single-photon source without fair
    sampling reaches ``bound`` under E3, i.e. the root of ``5 - 4 sqrt(5) eta = bound``."""
    eta = (5.0 - bound) / (4.0 * SQRT5)
    if not 0.0 <= eta <= 1.0:
        raise RangeError(f"bound {bound} is not reachable with an efficiency in [0, 1]")
    return eta


@dataclass(frozen=True)
class KcbsReport:
    """Result of a KCBS test in all five contexts.

    ``post_selection[k]`` is ``P(E_j)`` in context ``k + 1``; the stderr fields
    are only filled in by data analysis.
    """

    event: str
    correlations: tuple[float, ...]
    post_selection: tuple[float, ...]
    g: tuple[float, ...]
    probabilities: tuple[tuple[float, float, float], ...] = ()
    bound_corrected: float | None = None
    bound_ideal: float = CLASSICAL_BOUND
    correlation_stderr: tuple[float, ...] | None = None
    beta_stderr: float | None = None
    post_selection_stderr: tuple[float, ...] | None = None
    n_series: int = 0
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for c in self.correlations:
            if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
                raise ValueError(f"correlation {c} outside [-1, 1]")

    @property
    def beta(self) -> float:
        return math.fsum(self.correlations)

    @property
    def pooled_post_selection(self) -> float:
        return math.fsum(self.post_selection) / len(self.post_selection)

    @property
    def bound(self) -> float:
        return self.bound_ideal if self.bound_corrected is None else self.bound_corrected

    @property
    def violates(self) -> bool:
        return self.beta < self.bound


def kcbs_beta(
    state: OpticalState,
    ev: EventDefinition | str = E3,
    eta: float = 1.0,
    contexts: list[MeasurementContext] | None = None,
    n_max: int | None = None,
    flips: tuple[float, float, float, float] | None = None,
) -> KcbsReport:
    """KCBS parameter of ``state`` under event ``ev`` from the exact click model.

    Every context is conditioned on ``ev`` separately. For the ideal symmetric
    geometry the five post-selection probabilities must agree; a spread above
    1e-10 raises.

    Args:
        flips: optional arguments of :func:`corrected_bound`.
    """
    ev = event(ev)
    contexts = contexts or all_contexts()
    if len(contexts) != N_CONTEXTS:
        raise RangeError("a KCBS test needs all five contexts")
    corr, post, g, probs = [], [], [], []
    for ctx in contexts:
        d = condition(joint_distribution(state, ctx, eta, n_max), ev)
        corr.append(correlation(d))
        post.append(d.post_selection)
        probs.append((d.p_minus_i, d.p_minus_next, d.p_joint_minus))
        try:
            g.append(g_correlation(d))
        except UndefinedEstimateError:
            g.append(math.nan)
    if all(c.is_ideal for c in contexts) and max(post) - min(post) > 1e-10:
        raise ArithmeticError(f"post-selection differs between ideal contexts: {post}")
    return KcbsReport(
        event=ev.id,
        correlations=tuple(corr),
        post_selection=tuple(post),
        g=tuple(g),
        probabilities=tuple(probs),
        bound_corrected=corrected_bound(*flips) if flips is not None else None,
    )


def coherent_beta_closed_form(nbar: float, ev: EventDefinition | str) -> tuple[float, float]:
    """Closed-form ``(beta, P(ev))`` for a coherent input of mean photon number ``nbar``.

    With ``s = sqrt(5)``:

    * E1: ``beta = 5 [e^{-2n/s} - 2 e^{-(s-1)n/s} + e^{-n}] / P(E1)``,
      ``P(E1) = e^{-2n/s} + 2 e^{-(s-1)n/s} - 3 e^{-n}``;
    * E2: ``beta = 5 [1 - e^{-n} + 4 e^{-2n/s} - 4 e^{-n/s}] / P(E2)``,
      ``P(E2) = 1 - e^{-n}``;
    * E3: ``beta = 5 [1 - 2 e^{-n/s}]^2``, ``P(E3) = 1``.
    """
    ev = event(ev)
    if nbar < 0:
        raise RangeError(f"mean photon number must be >= 0, got {nbar}")
    s = SQRT5
    if ev is E3:
        return 5.0 * (1.0 - 2.0 * math.exp(-nbar / s)) ** 2, 1.0
    if nbar == 0:
        raise UndefinedConditioningError(f"{ev.id} never occurs for the vacuum")
    if ev is E1:
        a = math.exp(-2.0 * nbar / s)
        b = math.exp(-(s - 1.0) * nbar / s)
        c = math.exp(-nbar)
        p = a + 2.0 * b - 3.0 * c
        return 5.0 * (a - 2.0 * b + c) / p, p
    p = -math.expm1(-nbar)
    num = 1.0 - math.exp(-nbar) + 4.0 * math.exp(-2.0 * nbar / s) - 4.0 * math.exp(-nbar / s)
    return 5.0 * num / p, p


def coherent_kernel(intensity: float, ev: EventDefinition | str) -> float:
    """``beta(alpha|E_j)`` as a function of ``|alpha|^2`` (already scaled by the
    efficiency), evaluated without cancellation near the vacuum.

    At zero intensity E1 and E2 take their limiting value ``5 - 4 sqrt(5)``.
    """
    ev = event(ev)
    a = intensity / SQRT5
    b = intensity * (1.0 - 2.0 / SQRT5)
    u_a, q_a = -math.expm1(-a), math.exp(-a)
    if ev is E3:
        return 5.0 * (2.0 * u_a - 1.0) ** 2
    if intensity == 0:
        return QUANTUM_BOUND
    if ev is E1:
        u_b, q_b = -math.expm1(-b), math.exp(-b)
        return 5.0 * (q_a * u_b - 2.0 * u_a * q_b) / (2.0 * u_a * q_b + q_a * u_b)
    d = -math.expm1(-intensity)
    return 5.0 * (d - 4.0 * q_a * u_a) / d


def post_selection_consistency(dist: OutcomeDistribution, ev: EventDefinition) -> list[float]:
    """``P({a_i, a_{i+1}} & ev) / P({a_i, a_{i+1}} | ev)`` for every outcome pair
    of nonzero conditional probability; each equals ``P(ev)``."""
    cond = condition(dist, ev)
    mask = ev.mask()
    joint = np.where(mask, dist.table, 0.0).sum(axis=2)
    given = cond.table.sum(axis=2)
    return [float(joint[k] / given[k]) for k in np.ndindex(2, 2) if given[k] > 0]

