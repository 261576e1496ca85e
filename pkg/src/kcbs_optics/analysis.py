"""Count-table analysis: event classes by inclusion-exclusion, conditional
probabilities, correlations, beta and per-series standard errors."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import CountsFormatError, InconsistentCountsError, UndefinedConditioningError
from .events import E2, E3, EventDefinition, KcbsReport, corrected_bound, correlation_from_probabilities, event
from .montecarlo import CSV_HEADER, CountsSeries
from .network import N_CONTEXTS, SETTING_ROLES

Roles = Mapping[int, tuple[int, int, int]]


@dataclass(frozen=True)
class EventCounts:
    """Trial counts of the three event classes for one series.

    ``exactly_one[d - 1]`` counts trials where detector ``d`` was the only one
    to click.
    """

    n_e1: int
    n_e2: int
    n_e3: int
    exactly_one: tuple[int, int, int]


def event_counts(series: CountsSeries) -> EventCounts:
    """Reconstruct event-class counts from singles and coincidences.

    ``N_E2 = sum C_d - sum C_de + C_123`` (at least one click) and
    ``N_E1 = sum C_d - 2 sum C_de + 3 C_123`` (exactly one click).
    """
    s = series
    singles = s.c1 + s.c2 + s.c3
    pairs = s.c12 + s.c13 + s.c23
    n_e2 = singles - pairs + s.c123
    n_e1 = singles - 2 * pairs + 3 * s.c123
    exactly = (
        s.c1 - s.c12 - s.c13 + s.c123,
        s.c2 - s.c12 - s.c23 + s.c123,
        s.c3 - s.c13 - s.c23 + s.c123,
    )
    if min(n_e1, *exactly) < 0 or not n_e1 <= n_e2 <= s.nt:
        raise InconsistentCountsError(
            f"context {s.context} series {s.series}: inclusion-exclusion gives "
            f"N_E1={n_e1}, N_E2={n_e2}, exactly-one={exactly}, NT={s.nt}"
        )
    return EventCounts(n_e1, n_e2, s.nt, exactly)


def parse_counts_csv(path) -> list[CountsSeries]:
    """Read a counts CSV.

    ``path`` may be a filename or an open text stream. Every row is checked
    against the count-table invariants.

    Raises:
        CountsFormatError: wrong header, malformed row or broken invariant;
            the message names the (1-based, header = 1) row and rule.
    """
    if hasattr(path, "read"):
        return _parse(path)
    try:
        fh = open(Path(path), newline="")
    except OSError as exc:
        raise CountsFormatError(f"cannot read {path}: {exc.strerror}", rule="file") from exc
    with fh:
        return _parse(fh)


def _parse(fh) -> list[CountsSeries]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise CountsFormatError("empty file", row=1, rule="header") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise CountsFormatError(f"expected header {','.join(CSV_HEADER)}", row=1, rule="header")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise CountsFormatError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", row=lineno, rule="shape")
        try:
            values = [int(c) for c in row]
        except ValueError:
            raise CountsFormatError(f"non-integer field in {row}", row=lineno, rule="integer") from None
        if values[0] not in range(1, N_CONTEXTS + 1):
            raise CountsFormatError(f"context {values[0]} not in 1..5", row=lineno, rule="context")
        out.append(CountsSeries(*values).validate(row=lineno))
    return out


def _conditional(s: CountsSeries, roles: tuple[int, int, int], ev: EventDefinition):
    """``(N_ev, n(A_i=-1), n(A_{i+1}=-1), n(both=-1))`` for one series."""
    di, dn, _ = roles
    ec = event_counts(s)
    if ev is E3:
        return ec.n_e3, s.single(di), s.single(dn), s.pair(di, dn)
    if ev is E2:
        return ec.n_e2, s.single(di), s.single(dn), s.pair(di, dn)
    return ec.n_e1, ec.exactly_one[di - 1], ec.exactly_one[dn - 1], 0


def _pool(series: Sequence[CountsSeries]) -> CountsSeries:
    fields = np.sum([s.row()[2:] for s in series], axis=0)
    return CountsSeries(series[0].context, -1, *map(int, fields))


def _context_terms(s: CountsSeries, roles, ev):
    n, ni, nn, nj = _conditional(s, roles, ev)
    if n == 0:
        raise UndefinedConditioningError(
            f"no {ev.id} trials in context {s.context} series {s.series}"
        )
    pi, pn, pj = ni / n, nn / n, nj / n
    g = pj / (pi * pn) if pi > 0 and pn > 0 else math.nan
    return correlation_from_probabilities(pi, pn, pj), (pi, pn, pj), n / s.nt, g


def _stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan
    return float(values.std(ddof=1) / math.sqrt(values.size))


def analyze(
    series_list: Sequence[CountsSeries],
    ev: EventDefinition | str,
    fair_sampling: bool = False,
    roles: Roles | None = None,
    flips: tuple[float, float, float, float] | None = None,
    multiphoton_tolerance: float = 0.01,
) -> KcbsReport:
    """KCBS report from count tables.

    Central values use counts pooled over all series of a context;
    uncertainties are standard errors of the per-series values (series with
    the same index in the five contexts form one repetition of beta).

    With ``fair_sampling`` the trials in which no detector clicked are
    attributed to loss and dropped: E3 is analyzed as E2. The E1 and E2
    results already exclude those trials and are unchanged. A warning is
    issued when multi-click trials exceed ``multiphoton_tolerance`` of E2,
    since the extrapolation then no longer describes a single-photon source.

    Args:
        roles: detector assignment per context,
            ``{i: (detector of A_i, detector of A_{i+1}, ancilla)}``; defaults
            to the setting of :mod:`kcbs_optics.network`.
        flips: arguments of :func:`corrected_bound` for the report's bound.
    """
    requested = event(ev)
    effective = E2 if (fair_sampling and requested is E3) else requested
    roles = dict(roles or SETTING_ROLES)
    by_ctx: dict[int, list[CountsSeries]] = {}
    for s in series_list:
        by_ctx.setdefault(s.context, []).append(s)
    if sorted(by_ctx) != list(range(1, N_CONTEXTS + 1)):
        raise CountsFormatError(f"need series for contexts 1..5, got {sorted(by_ctx)}", rule="contexts")

    corr, probs, post, g = [], [], [], []
    corr_se, post_se = [], []
    per_series: dict[int, list[float]] = {}
    notes = []
    for i in range(1, N_CONTEXTS + 1):
        group = sorted(by_ctx[i], key=lambda s: s.series)
        c, p, ps, gv = _context_terms(_pool(group), roles[i], effective)
        corr.append(c)
        probs.append(p)
        post.append(ps)
        g.append(gv)
        rep = [_context_terms(s, roles[i], effective) for s in group]
        corr_se.append(_stderr([r[0] for r in rep]))
        post_se.append(_stderr([r[2] for r in rep]))
        for s, r in zip(group, rep):
            per_series.setdefault(s.series, []).append(r[0])
        if fair_sampling:
            ec = event_counts(_pool(group))
            frac = 1.0 - ec.n_e1 / ec.n_e2 if ec.n_e2 else 0.0
            if frac > multiphoton_tolerance:
                msg = f"context {i}: multi-click fraction {frac:.3g} of E2 trials; fair sampling assumes ~0"
                notes.append(msg)
                warnings.warn(msg, stacklevel=2)
    complete = [v for v in per_series.values() if len(v) == N_CONTEXTS]
    beta_se = _stderr([math.fsum(v) for v in complete])
    return KcbsReport(
        event=effective.id,
        correlations=tuple(corr),
        post_selection=tuple(post),
        g=tuple(g),
        probabilities=tuple(probs),
        bound_corrected=corrected_bound(*flips) if flips is not None else None,
        correlation_stderr=tuple(corr_se),
        beta_stderr=beta_se,
        post_selection_stderr=tuple(post_se),
        n_series=min(len(v) for v in by_ctx.values()),
        notes=tuple(notes),
    )


REPORT_HEADER = ("context", "term", "value", "stderr")


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(x, ".9g")


def report_rows(report: KcbsReport) -> list[tuple[str, str, str, str]]:
    se = report.correlation_stderr or (None,) * N_CONTEXTS
    pse = report.post_selection_stderr or (None,) * N_CONTEXTS
    rows = []
    for k in range(N_CONTEXTS):
        ctx = str(k + 1)
        if report.probabilities:
            pi, pn, pj = report.probabilities[k]
            rows += [(ctx, "p_i", _fmt(pi), ""), (ctx, "p_next", _fmt(pn), ""), (ctx, "p_joint", _fmt(pj), "")]
        rows.append((ctx, "correlation", _fmt(report.correlations[k]), _fmt(se[k])))
        rows.append((ctx, "g", _fmt(report.g[k]), ""))
        rows.append((ctx, "post_selection", _fmt(report.post_selection[k]), _fmt(pse[k])))
    rows.append(("all", "beta", _fmt(report.beta), _fmt(report.beta_stderr)))
    rows.append(("all", "post_selection", _fmt(report.pooled_post_selection), ""))
    rows.append(("all", "bound", _fmt(report.bound), ""))
    rows.append(("all", "violation", "1" if report.violates else "0", ""))
    return rows


def write_report_csv(report: KcbsReport, path) -> None:
    if hasattr(path, "write"):
        fh = path
    else:
        fh = open(Path(path), "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        w.writerows(report_rows(report))
    finally:
        if fh is not path:
            fh.close()


def format_summary(report: KcbsReport) -> str:
    buf = io.StringIO()
    buf.write(f"event {report.event}, {report.n_series} series per context\n")
    for k, c in enumerate(report.correlations):
        se = report.correlation_stderr[k] if report.correlation_stderr else math.nan
        buf.write(f"  <A{k + 1}A{(k + 1) % 5 + 1}> = {c:+.4f} +/- {se:.4f}"
                  f"   P(E) = {report.post_selection[k]:.4f}\n")
    se = report.beta_stderr if report.beta_stderr is not None else math.nan
    verdict = "violated" if report.violates else "not violated"
    buf.write(f"beta = {report.beta:+.4f} +/- {se:.4f}; bound {report.bound:.4f} {verdict}\n")
    for n in report.notes:
        buf.write(f"note: {n}\n")
    return buf.getvalue()
