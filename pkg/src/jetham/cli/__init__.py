"""Command-line front end: ``jetham compute`` and ``jetham verify``.

Exit codes: 0 success, 1 verification failure, 2 unreadable or invalid
scenario, 3 math domain error, 4 singular metric.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from ..errors import (
    ArityError,
    DomainError,
    ExprSyntaxError,
    JethamError,
    OrderTooHigh,
    ScenarioError,
    ShapeMismatch,
    SingularJacobian,
    SingularMetric,
    UnknownCoordinate,
)
from ..scenario import Scenario
from ..verify.suites import SUITES, run_suite
from .report import WHATS, compute_document, dumps, verify_document

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN, EXIT_SINGULAR = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def thread_count() -> int:
    raw = os.environ.get("JETHAM_THREADS", "")
    try:
        cap = int(raw) if raw else 1
    except ValueError:
        cap = 1
    return max(1, min(cap, os.cpu_count() or 1))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: cannot read scenario ({exc.strerror or exc})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    try:
        return Scenario.from_dict(doc)
    except (ScenarioError, ExprSyntaxError, UnknownCoordinate, ArityError, ShapeMismatch) as exc:
        raise CliError(EXIT_PARSE, f"{path}: invalid scenario: {exc}") from exc


def _classify(exc: JethamError) -> int:
    if isinstance(exc, SingularMetric):
        return EXIT_SINGULAR
    if isinstance(exc, (DomainError, SingularJacobian, OrderTooHigh, ArithmeticError)):
        return EXIT_DOMAIN
    return EXIT_PARSE


def _mapper(threads: int):
    if threads <= 1:
        return map, None
    pool = ThreadPoolExecutor(max_workers=threads)
    return pool.map, pool


def cmd_compute(scenario: str, what: str, out: str) -> int:
    sc = load_scenario(scenario)
    # build shared objects before any worker threads touch them
    _ = sc.connection, sc.nlc
    mapper, pool = _mapper(thread_count())
    try:
        doc = compute_document(sc, what, mapper)
    finally:
        if pool is not None:
            pool.shutdown()
    text = dumps(doc)
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_verify(scenario: str, suite: str, out: str | None = None) -> int:
    sc = load_scenario(scenario)
    results = run_suite(sc, suite)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = f"  ({r.note})" if r.note else ""
        sys.stdout.write(f"{status}  {r.name}  max_residual={float(r.residual):.3e}{note}\n")
    ok = all(r.passed for r in results)
    sys.stdout.write(f"{'all checks passed' if ok else 'verification failed'}: "
                     f"{sum(r.passed for r in results)}/{len(results)}\n")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(dumps(verify_document(sc, suite, results)))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetham", description="Tensor calculus on the dual 1-jet bundle.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("compute", help="compute a table at every eval point")
    c.add_argument("--scenario", required=True)
    c.add_argument("--what", required=True, choices=WHATS)
    c.add_argument("--out", required=True, help="output path, or - for stdout")
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--scenario", required=True)
    v.add_argument("--suite", default="all", choices=SUITES)
    v.add_argument("--out", help="also write the JSON report here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            return cmd_compute(args.scenario, args.what, args.out)
        return cmd_verify(args.scenario, args.suite, args.out)
    except CliError as exc:
        sys.stderr.write(f"jetham: {exc}\n")
        return exc.code
    except JethamError as exc:
        code = _classify(exc)
        sys.stderr.write(f"jetham: {type(exc).__name__}: {exc}\n")
        return code
    except (ZeroDivisionError, OverflowError, FloatingPointError) as exc:
        sys.stderr.write(f"jetham: domain error: {exc}\n")
        return EXIT_DOMAIN


__all__ = ["main", "cmd_compute", "cmd_verify", "load_scenario", "thread_count", "build_parser"]
