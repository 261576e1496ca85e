"""Trial-level sampler producing count tables, and the count-based estimators.

Randomness is keyed by ``(seed, context, series)`` through numpy's
counter-based Philox generator, so each series can be generated alone, in
any order or in parallel, and still reproduce the sequential output.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CountsFormatError, RangeError, SaturationError, TruncationError, UndefinedEstimateError
from .network import MeasurementContext, context
from .states import TAIL_BOUND, Coherent, OpticalState, TruncationWarning, photon_number_distribution

DEFAULT_TRIGGERS = 2_591_146
CSV_HEADER = ("context", "series", "C1", "C2", "C3", "C12", "C13", "C23", "C123", "NT")
CHUNK = 1 << 20


@dataclass(frozen=True)
class TrialConfig:
    state: OpticalState
    eta: float = 1.0
    contexts: tuple[int, ...] = (1, 2, 3, 4, 5)
    trials_per_series: int = DEFAULT_TRIGGERS
    series: int = 1
    seed: int = 0
    number_basis: bool = False
    n_max: int | None = None

    def __post_init__(self):
        if self.trials_per_series <= 0 or self.series <= 0:
            raise RangeError("trials_per_series and series must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise RangeError(f"detection efficiency must lie in [0, 1], got {self.eta}")
        if not 0 <= self.seed < 2**64:
            raise RangeError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "contexts", tuple(int(c) for c in self.contexts))


@dataclass(frozen=True)
class CountsSeries:
    """Singles and coincidence counts (all gated by the trigger) for one series.

    ``c12`` counts trials where detectors 1 and 2 both clicked regardless of
    detector 3, and so on. ``outcomes`` optionally keeps the full table of
    detector click patterns indexed ``[D1, D2, D3]``; it is not serialized.
    """

    context: int
    series: int
    c1: int
    c2: int
    c3: int
    c12: int
    c13: int
    c23: int
    c123: int
    nt: int
    outcomes: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def singles(self) -> tuple[int, int, int]:
        return self.c1, self.c2, self.c3

    def single(self, d: int) -> int:
        return self.singles[d - 1]

    def pair(self, a: int, b: int) -> int:
        key = tuple(sorted((a, b)))
        return {(1, 2): self.c12, (1, 3): self.c13, (2, 3): self.c23}[key]

    def row(self) -> tuple[int, ...]:
        return (self.context, self.series, self.c1, self.c2, self.c3,
                self.c12, self.c13, self.c23, self.c123, self.nt)

    def violations(self) -> list[str]:
        """Count-table rules this series breaks (empty when valid)."""
        bad = []
        values = self.row()[2:]
        if any(v < 0 for v in values):
            bad.append("counts must be non-negative")
        for d, c in enumerate(self.singles, start=1):
            if c > self.nt:
                bad.append(f"C{d} > NT")
        for (a, b), c in (((1, 2), self.c12), ((1, 3), self.c13), ((2, 3), self.c23)):
            if c > min(self.single(a), self.single(b)):
                bad.append(f"C{a}{b} > min(C{a}, C{b})")
        if self.c123 > min(self.c12, self.c13, self.c23):
            bad.append("C123 > min(C12, C13, C23)")
        return bad

    def validate(self, row: int | None = None) -> "CountsSeries":
        bad = self.violations()
        if bad:
            raise CountsFormatError("; ".join(bad), row=row, rule=bad[0])
        return self


def series_rng(seed: int, context_index: int, series_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(context_index, series_index))
    return np.random.Generator(np.random.Philox(ss))


def _mode_clicks_coherent(rng, n, nbar, fractions, eta) -> np.ndarray:
    p = np.array([-math.expm1(-eta * f * nbar) for f in fractions])
    return rng.random((n, 3)) < p


def _mode_clicks_number(rng, n, probs, fractions, eta) -> np.ndarray:
    photons = rng.choice(len(probs), size=n, p=probs)
    pvals = [eta * f for f in fractions] + [1.0 - eta]
    pvals[-1] = max(0.0, 1.0 - math.fsum(pvals[:3]))
    placed = rng.multinomial(photons, pvals)
    return placed[:, :3] > 0


def _tally(detector_clicks: np.ndarray) -> tuple[list[int], np.ndarray]:
    d1, d2, d3 = detector_clicks[:, 0], detector_clicks[:, 1], detector_clicks[:, 2]
    codes = d1.astype(np.int64) * 4 + d2 * 2 + d3
    table = np.bincount(codes, minlength=8).reshape(2, 2, 2)
    counts = [int(np.count_nonzero(d1)), int(np.count_nonzero(d2)), int(np.count_nonzero(d3)),
              int(np.count_nonzero(d1 & d2)), int(np.count_nonzero(d1 & d3)),
              int(np.count_nonzero(d2 & d3)), int(np.count_nonzero(d1 & d2 & d3))]
    return counts, table


def simulate_series(cfg: TrialConfig, ctx: MeasurementContext, series_index: int, probs=None) -> CountsSeries:
    """One series of ``cfg.trials_per_series`` triggered trials in ``ctx``.

    Per trial: draw a photon number, scatter the photons over the three modes
    with the context's split fractions, lose each with probability ``1 - eta``,
    and record which detectors fired.
    """
    rng = series_rng(cfg.seed, ctx.index, series_index)
    direct = isinstance(cfg.state, Coherent) and not cfg.number_basis
    if not direct and probs is None:
        probs = _sampling_probs(cfg)
    # column m of mode clicks belongs to detector ctx.roles[m]
    order = [ctx.mode_of_detector(d) for d in (1, 2, 3)]
    totals = np.zeros(7, dtype=np.int64)
    table = np.zeros((2, 2, 2), dtype=np.int64)
    remaining = cfg.trials_per_series
    while remaining:
        n = min(CHUNK, remaining)
        remaining -= n
        if direct:
            modes = _mode_clicks_coherent(rng, n, cfg.state.nbar, ctx.split_fractions, cfg.eta)
        else:
            modes = _mode_clicks_number(rng, n, probs, ctx.split_fractions, cfg.eta)
        counts, t = _tally(modes[:, order])
        totals += counts
        table += t
    return CountsSeries(ctx.index, series_index, *map(int, totals), cfg.trials_per_series, outcomes=table)


def _sampling_probs(cfg: TrialConfig) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        pnd = photon_number_distribution(cfg.state, cfg.n_max)
    if pnd.tail_mass > TAIL_BOUND:
        raise TruncationError(pnd.tail_mass, TAIL_BOUND, pnd.n_max)
    return pnd.probs / pnd.probs.sum()


def simulate_counts(cfg: TrialConfig, contexts: Sequence[MeasurementContext] | None = None) -> list[CountsSeries]:
    """Synthetic count tables, ordered by context then series.

    Args:
        contexts: explicit (e.g. perturbed) contexts; defaults to the ideal
            contexts named in ``cfg.contexts``.
    """
    ctxs = list(contexts) if contexts is not None else [context(i) for i in cfg.contexts]
    probs = None
    if not (isinstance(cfg.state, Coherent) and not cfg.number_basis):
        probs = _sampling_probs(cfg)
    return [simulate_series(cfg, ctx, s, probs) for ctx in ctxs for s in range(cfg.series)]


def write_counts_csv(series: Iterable[CountsSeries], path) -> None:
    """Write series with header ``context,series,C1,C2,C3,C12,C13,C23,C123,NT``.

    ``path`` may be a filename or an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(series, path)
        return
    with open(Path(path), "w", newline="") as fh:
        _write_rows(series, fh)


def _write_rows(series, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in series:
        w.writerow(s.row())


def estimate_g2(counts_a: int, counts_b: int, counts_ab: int, n_t: int) -> float:
    """Heralded second-order coherence ``C_ab N_T / (C_a C_b)``."""
    if counts_a <= 0 or counts_b <= 0:
        raise UndefinedEstimateError("g2 needs non-zero singles on both detectors")
    return counts_ab * n_t / (counts_a * counts_b)


def estimate_heralding_efficiency(singles: Sequence[int], n_t: int) -> float:
    """Fraction of triggers accompanied by a detected photon, ``sum_i C_i / N_T``."""
    if n_t <= 0:
        raise RangeError("trigger count must be positive")
    return sum(singles) / n_t


def estimate_nbar(click_rates: Sequence[float]) -> float:
    """Mean photon number of a coherent field from per-detector click rates,
    ``sum_i ln(1 / (1 - r_i))``."""
    total = 0.0
    for r in click_rates:
        if r >= 1.0:
            raise SaturationError(f"click rate {r} cannot be inverted")
        if r < 0:
            raise RangeError(f"negative click rate {r}")
        total += -math.log1p(-r)
    return total
