"""``cryocount`` command line: model, sweep, simulate, case-study.

Exit codes: 0 success, 2 configuration error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import replace

from . import harness
from .bwmodel import ScenarioParams
from .coproc import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3

# (flag, ScenarioParams field, type)
SCENARIO_FLAGS = [
    ("--task", "task", str),
    ("--N", "N", int),
    ("--T", "T", int),
    ("--mode", "mode", str),
    ("--M", "M", int),
    ("--D", "D", int),
    ("--b-theta", "b_theta", int),
    ("--b-x", "b_x", int),
    ("--N-d", "N_d", int),
    ("--N-G", "N_G", int),
    ("--K", "K", int),
    ("--b", "b", int),
    ("--N-C", "N_C", int),
    ("--r", "r", float),
    ("--collection", "collection", str),
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario_args(ap: argparse.ArgumentParser, required=("task", "N")) -> None:
    for flag, dest, typ in SCENARIO_FLAGS:
        ap.add_argument(flag, dest=dest, type=typ, required=dest in required)
    ap.add_argument("--t-qc-ns", type=float, default=640.0, help="shot duration in ns")


def _policy_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--b-policy", choices=("explicit", "log", "overhead"), default="log")
    ap.add_argument("--b-value", type=float, help="b for 'explicit', r for 'overhead'")


def _output_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("-o", "--output", help="CSV path (default: standard output)")
    ap.add_argument("--figure-data", metavar="PATH", help="write N-vs-bandwidth/heat/exec-time series as JSON")


def _params(ns) -> ScenarioParams:
    kw = {dest: getattr(ns, dest) for _, dest, _ in SCENARIO_FLAGS if getattr(ns, dest, None) is not None}
    kw["t_qc"] = ns.t_qc_ns * 1e-9
    return ScenarioParams(**kw)


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit(rows, ns, axis="N") -> None:
    with _sink(ns.output) as fh:
        harness.write_csv(rows, fh)
    if ns.figure_data:
        with open(ns.figure_data, "w") as fh:
            json.dump(harness.figure_series(rows, axis), fh, indent=2)


def cmd_model(ns) -> int:
    row = harness.evaluate(_params(ns), ns.b_policy, ns.b_value)
    _emit([row], ns)
    return EXIT_OK


def cmd_sweep(ns) -> int:
    spec = harness.SweepSpec.from_json(ns.config)
    if ns.seed is not None:
        spec = replace(spec, seed=ns.seed)
    rows = harness.run_model_sweep(spec, workers=ns.workers)
    _emit(rows, ns, spec.axis if spec.axis != "b" else "b")
    return EXIT_CONFIG if any(r.error for r in rows) else EXIT_OK


def cmd_simulate(ns) -> int:
    p = _params(ns)
    if p.b is None:
        p = p.with_(b=harness.counter_width_policy(ns.b_policy, p, ns.b_value))
    report = harness.run_functional_validation(p, ns.seed, loops=ns.loops, saturate=ns.saturate)
    for line in report.lines():
        print(line, file=sys.stderr)
    row = harness.evaluate(p)
    row.simulated_uplink = report.simulated_uplink
    _emit([row], ns)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_case_study(ns) -> int:
    row = harness.run_case_study(ns.N, ns.K, ns.N_G, ns.M, ns.T, ns.t_qc_ns * 1e-9, ns.b_policy, ns.b_value)
    _emit([row], ns)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cryocount", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("model", help="evaluate one scenario point")
    _scenario_args(m)
    _policy_args(m)
    _output_args(m)
    m.set_defaults(func=cmd_model)

    s = sub.add_parser("sweep", help="evaluate a sweep described by a JSON config")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, default=1)
    _output_args(s)
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("simulate", help="functional simulation checked against host computation")
    _scenario_args(f)
    _policy_args(f)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--loops", type=int)
    f.add_argument("--saturate", action="store_true", help="all-ones shots; two-sided rate check")
    _output_args(f)
    f.set_defaults(func=cmd_simulate)

    c = sub.add_parser("case-study", help="PS evaluation of an externally characterised VQE problem")
    c.add_argument("--N", type=int)
    c.add_argument("--K", type=int)
    c.add_argument("--N-G", dest="N_G", type=int)
    c.add_argument("--M", type=int, required=True)
    c.add_argument("--T", type=int, default=10**6)
    c.add_argument("--t-qc-ns", type=float, default=640.0)
    _policy_args(c)
    _output_args(c)
    c.set_defaults(func=cmd_case_study)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"cryocount: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cryocount: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
