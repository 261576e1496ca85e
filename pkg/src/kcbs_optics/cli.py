"""Command-line front end.

Subcommands: ``sweep``, ``simulate``, ``analyze``, ``mixture``, ``threshold``.

Parameters come from, in increasing priority: built-in defaults, a flat
``key: value`` config file (``--config``), environment variables
``KCBS_<KEY>`` (e.g. ``KCBS_SEED``) and command-line flags. States are tagged
records in YAML flow syntax, e.g. ``{kind: coherent, nbar: 0.4}``.

Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure, 4 no violation
(``analyze --require-violation`` only).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Any, Sequence

import yaml

from . import analysis, events, montecarlo, quasiprob
from .errors import DataError, NumericError, UndefinedConditioningError
from .network import CLASSICAL_BOUND
from .reference_data import PRINTED_ROLES
from .states import from_record

ENV_PREFIX = "KCBS_"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC, EXIT_NO_VIOLATION = 0, 1, 2, 3, 4

SWEEP_GRID = (0.10, 0.40, 0.72, 0.99, 1.24, 1.57, 1.84)

DEFAULTS: dict[str, dict[str, Any]] = {
    "sweep": {"nbar": list(SWEEP_GRID), "event": "all", "eta": 1.0},
    "simulate": {
        "state": {"kind": "coherent", "nbar": 1.84},
        "eta": 1.0,
        "seed": 0,
        "series": 1,
        "triggers": montecarlo.DEFAULT_TRIGGERS,
        "contexts": [1, 2, 3, 4, 5],
        "number_basis": False,
    },
    "analyze": {"event": "e2", "fair_sampling": False, "printed_labels": False,
                "require_violation": False, "flips": None, "bound": None},
    "mixture": {"partner": {"kind": "coherent", "nbar": 0.0}, "eta": 1.0,
                "lambdas": [k / 100 for k in range(101)], "bound": CLASSICAL_BOUND},
    "threshold": {"bound": CLASSICAL_BOUND, "flips": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(",", " ").split()]


def _ints(text) -> list[int]:
    return [int(x) for x in _floats(text)]


def _state(value):
    if isinstance(value, str):
        value = yaml.safe_load(value)
    return from_record(value)


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"not a boolean: {value!r}")


CONVERTERS = {
    "nbar": _floats, "eta": float, "event": str, "seed": int, "series": int,
    "triggers": int, "contexts": _ints, "number_basis": _bool, "fair_sampling": _bool,
    "printed_labels": _bool, "require_violation": _bool, "lambdas": _floats,
    "bound": lambda v: None if v is None else float(v), "flips": lambda v: None if v is None else _floats(v),
    "state": _state, "partner": _state, "out": str,
}


def load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise DataError(f"malformed config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"config {path} must be a flat key: value mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def resolve(command: str, args: argparse.Namespace, environ=os.environ) -> dict[str, Any]:
    """Merge defaults, config file, environment and flags for ``command``."""
    merged = dict(DEFAULTS[command])
    config = load_config(getattr(args, "config", None))
    for key in list(merged) + ["out"]:
        if key in config:
            merged[key] = config[key]
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            merged[key] = env
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    out = {}
    for key, value in merged.items():
        try:
            out[key] = CONVERTERS[key](value) if value is not None else None
        except DataError:
            raise
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {key}: {value!r} ({exc})") from exc
    return out


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _events(name: str):
    if str(name).lower() == "all":
        return [events.E1, events.E2, events.E3]
    return [events.event(name)]


def cmd_sweep(cfg) -> int:
    fh, close = _open_out(cfg.get("out"))
    try:
        fh.write("nbar,event,beta,p_event\n")
        for nbar in cfg["nbar"]:
            for ev in _events(cfg["event"]):
                try:
                    beta, p = events.coherent_beta_closed_form(cfg["eta"] * nbar, ev)
                except UndefinedConditioningError:
                    beta, p = math.nan, 0.0
                fh.write(f"{nbar:.9g},{ev.id},{beta:.9g},{p:.9g}\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_simulate(cfg) -> int:
    tc = montecarlo.TrialConfig(
        state=cfg["state"],
        eta=cfg["eta"],
        contexts=tuple(cfg["contexts"]),
        trials_per_series=cfg["triggers"],
        series=cfg["series"],
        seed=cfg["seed"],
        number_basis=cfg["number_basis"],
    )
    series = montecarlo.simulate_counts(tc)
    fh, close = _open_out(cfg.get("out"))
    try:
        montecarlo.write_counts_csv(series, fh)
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_analyze(cfg, input_path: str) -> int:
    series = analysis.parse_counts_csv(sys.stdin if input_path == "-" else input_path)
    roles = PRINTED_ROLES if cfg["printed_labels"] else None
    flips = tuple(cfg["flips"]) if cfg["flips"] else None
    if flips is not None and len(flips) != 4:
        raise UsageError("--flips takes four probabilities")
    report = analysis.analyze(series, cfg["event"], cfg["fair_sampling"], roles=roles, flips=flips)
    if cfg["bound"] is not None and flips is None:
        from dataclasses import replace

        report = replace(report, bound_corrected=cfg["bound"])
    sys.stderr.write(analysis.format_summary(report)) if cfg.get("out") in (None, "-") else sys.stdout.write(
        analysis.format_summary(report)
    )
    fh, close = _open_out(cfg.get("out"))
    try:
        analysis.write_report_csv(report, fh)
    finally:
        if close:
            fh.close()
    if cfg["require_violation"] and not report.violates:
        return EXIT_NO_VIOLATION
    return EXIT_OK


def cmd_mixture(cfg) -> int:
    curve = quasiprob.mixture_beta_curves(cfg["lambdas"], cfg["partner"], cfg["eta"], cfg["bound"])
    fh, close = _open_out(cfg.get("out"))
    try:
        fh.write("lambda,beta,witnessed\n")
        for lam, beta in curve.rows():
            verdict = quasiprob.nonclassicality_witness(beta, curve.bound)
            fh.write(f"{lam:.9g},{beta:.9g},{int(bool(verdict))}\n")
    finally:
        if close:
            fh.close()
    lam_star = "none" if curve.threshold is None else f"{curve.threshold:.9g}"
    sys.stderr.write(f"threshold lambda* = {lam_star} (bound {curve.bound:.9g})\n")
    return EXIT_OK


def cmd_threshold(cfg) -> int:
    bound = events.corrected_bound(*cfg["flips"]) if cfg["flips"] else cfg["bound"]
    fh, close = _open_out(cfg.get("out"))
    try:
        fh.write(f"{events.efficiency_threshold(bound):.12g}\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kcbs", description="KCBS contextuality test for optical states")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="flat key: value config file")
        sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("sweep", help="closed-form beta and P(E) for coherent light")
    common(sp)
    sp.add_argument("--nbar", help="mean photon numbers, comma separated")
    sp.add_argument("--event", help="e1, e2, e3 or all")
    sp.add_argument("--eta", type=float)

    sp = sub.add_parser("simulate", help="Monte Carlo count tables as CSV")
    common(sp)
    sp.add_argument("--state", help="state record, e.g. '{kind: fock, n: 1}'")
    sp.add_argument("--nbar", type=float, help="shortcut for a coherent state")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--series", type=int)
    sp.add_argument("--triggers", type=int, help="trigger count per series")
    sp.add_argument("--contexts", help="context indices, comma separated")
    sp.add_argument("--number-basis", dest="number_basis", action="store_const", const=True,
                    help="sample coherent light through its photon-number distribution")

    sp = sub.add_parser("analyze", help="KCBS report from a counts CSV")
    common(sp)
    sp.add_argument("input", help="counts CSV ('-' for stdin)")
    sp.add_argument("--event", choices=["e1", "e2", "e3", "E1", "E2", "E3"])
    sp.add_argument("--fair-sampling", dest="fair_sampling", action="store_const", const=True)
    sp.add_argument("--printed-labels", dest="printed_labels", action="store_const", const=True,
                    help="detector columns follow the published count tables")
    sp.add_argument("--flips", help="P(A1=-1),P(A1'=+1|A1=-1),P(A1=+1),P(A1'=-1|A1=+1)")
    sp.add_argument("--bound", type=float, help="explicit non-contextual bound")
    sp.add_argument("--require-violation", dest="require_violation", action="store_const", const=True,
                    help="exit 4 unless beta is below the bound")

    sp = sub.add_parser("mixture", help="E3 beta of single photon mixed with a partner state")
    common(sp)
    sp.add_argument("--partner", help="partner state record")
    sp.add_argument("--lambdas", help="mixing weights, comma separated")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--bound", type=float)

    sp = sub.add_parser("threshold", help="heralding efficiency needed to reach a bound")
    common(sp)
    sp.add_argument("--bound", type=float)
    sp.add_argument("--flips", help="four probabilities defining a corrected bound")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.nbar is not None:
        if args.state is not None:
            parser.error("give --state or --nbar, not both")
        args.state = {"kind": "coherent", "nbar": args.nbar}
    try:
        cfg = resolve(args.command, args)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.input)
        if args.command == "mixture":
            return cmd_mixture(cfg)
        return cmd_threshold(cfg)
    except UsageError as exc:
        sys.stderr.write(f"kcbs: {exc}\n")
        return EXIT_USAGE
    except DataError as exc:
        sys.stderr.write(f"kcbs: data error: {exc}\n")
        return EXIT_DATA
    except (NumericError, ArithmeticError) as exc:
        sys.stderr.write(f"kcbs: numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
