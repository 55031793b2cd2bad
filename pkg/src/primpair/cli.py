"""Command line interface.

Every command prints one machine-readable document to stdout and a single
``elapsed_ms=<n>`` line to stderr.  Stdout is a pure function of the
arguments: JSON is emitted with sorted keys and fixed separators, exact
rationals are carried as numerator and denominator strings, and any integer
at or beyond 2^53 is rendered as a decimal string so the value survives
readers that parse numbers as doubles.  Timing goes to stderr precisely so
repeated runs stay byte-identical on stdout.

Exit codes: 0 means membership holds, the check passed, or the criterion
proved; 1 means it did not (non-member, unresolved, no witness, a failed
row); 2 means the invocation itself was bad or a resource budget ran out.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from .charsum import audit_field
from .numtheory import (
    DEFAULT_FACTOR_BUDGET,
    Factorization,
    IncompleteFactorizationError,
    factorize,
    is_prime_power,
)
from .sieve import (
    DEFAULT_SUBSET_BITS,
    SieveReport,
    Verdict,
    decide,
    find_witness,
    sieve_eval,
)
from .table1 import RowEvaluation, evaluate_all
from .verify import (
    DEFAULT_ENUM_BOUND,
    DEFAULT_WITNESS_BUDGET,
    IN_P,
    VerifyReport,
    Witness,
    confirm_exceptions,
    verify_pair,
)

__all__ = ["RunConfig", "main"]

_SAFE_INT = 1 << 53

_OUTPUT_FORMATS = ("json", "csv", "text")

# table1 is a tabular report, so it defaults to CSV; everything else to JSON
_DEFAULT_OUTPUT = {"table1": "csv"}

_TABLE_COLUMNS = (
    "q",
    "n",
    "primes",
    "omega_l",
    "delta",
    "Delta",
    "threshold",
    "reference_delta",
    "reference_threshold",
    "deviation",
    "pass",
)

_PAIR_COLUMNS = ("q", "n", "mode", "verdict", "min_count", "max_attempts")


@dataclass(frozen=True)
class RunConfig:
    """Run-wide knobs shared by every command, echoed in JSON output."""

    seed: int = 0
    threads: int | None = None
    factor_budget: int = DEFAULT_FACTOR_BUDGET
    enum_bound: int = DEFAULT_ENUM_BOUND
    witness_budget: int = DEFAULT_WITNESS_BUDGET
    subset_bits: int = DEFAULT_SUBSET_BITS
    output: str = "json"

    def __post_init__(self):
        if self.threads is not None and self.threads < 1:
            raise ValueError(f"threads must be positive, got {self.threads}")
        for name in ("factor_budget", "enum_bound", "witness_budget", "subset_bits"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.output not in _OUTPUT_FORMATS:
            raise ValueError(f"output must be one of {_OUTPUT_FORMATS}, got {self.output!r}")


def _int_json(value: int):
    """Integers stay numbers while exactly representable in a double."""
    return value if -_SAFE_INT < value < _SAFE_INT else str(value)


def _fraction_json(value: Fraction | None):
    if value is None:
        return None
    return {"num": str(value.numerator), "den": str(value.denominator)}


def _config_json(cfg: RunConfig) -> dict:
    return {
        "seed": cfg.seed,
        "threads": cfg.threads,
        "factor_budget": _int_json(cfg.factor_budget),
        "enum_bound": _int_json(cfg.enum_bound),
        "witness_budget": _int_json(cfg.witness_budget),
        "subset_bits": cfg.subset_bits,
        "output": cfg.output,
    }


def _print_json(command: str, cfg: RunConfig, result) -> None:
    doc = {"command": command, "config": _config_json(cfg), "result": result}
    sys.stdout.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def _write_csv(stream, header, rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _factor_payload(f: Factorization) -> dict:
    return {
        "value": str(f.value),
        "factors": [[_int_json(p), e] for p, e in f.factors],
    }


def _factor_text(f: Factorization) -> str:
    if not f.factors:
        return f"{f.value} = 1"
    parts = " * ".join(f"{p}^{e}" if e > 1 else str(p) for p, e in f.factors)
    return f"{f.value} = {parts}"


def _sieve_payload(report: SieveReport) -> dict:
    return {
        "q": report.q,
        "n": report.n,
        "cq": report.cq,
        "l_primes": [_int_json(p) for p in report.l_primes],
        "sieve_primes": [_int_json(p) for p in report.sieve_primes],
        "r": report.r,
        "w_l": report.w_l,
        "delta": _fraction_json(report.delta),
        "delta_decimal": report.delta_float,
        "Delta": _fraction_json(report.Delta),
        "R": _fraction_json(report.R),
        "threshold": report.threshold,
        "pass": report.passes,
    }


def _sieve_text(report: SieveReport) -> list[str]:
    return [
        f"q={report.q} n={report.n} cq={report.cq}",
        "l_primes=" + (",".join(map(str, report.l_primes)) or "-"),
        "sieve_primes=" + (",".join(map(str, report.sieve_primes)) or "-"),
        f"r={report.r} w_l={report.w_l}",
        f"delta={report.delta_float}",
        f"threshold={report.threshold} pass={report.passes}",
    ]


def _witness_payload(witness: Witness | None):
    if witness is None:
        return None
    return {
        "exponent": _int_json(witness.exponent),
        "element": list(witness.element.coeffs),
        "attempts": witness.attempts,
    }


def _verify_payload(report: VerifyReport) -> dict:
    per = {}
    for code in sorted(report.per_trace):
        outcome = report.per_trace[code]
        per[str(code)] = {
            "a_coeffs": list(outcome.a_coeffs),
            "count": None if outcome.count is None else _int_json(outcome.count),
            "attempts": _int_json(outcome.attempts),
            "witness": _witness_payload(outcome.witness),
        }
    return {
        "q": report.q,
        "n": report.n,
        "mode": report.mode,
        "seed": report.seed,
        "verdict": report.verdict,
        "per_trace": per,
    }


def _verify_text(report: VerifyReport) -> list[str]:
    lines = [f"q={report.q} n={report.n} mode={report.mode} verdict={report.verdict}"]
    for code in sorted(report.per_trace):
        outcome = report.per_trace[code]
        detail = f"a_code={code} count={outcome.count} attempts={outcome.attempts}"
        if outcome.witness is not None:
            detail += f" witness_exponent={outcome.witness.exponent}"
        lines.append(detail)
    return lines


def _verdict_payload(verdict: Verdict) -> dict:
    evidence = verdict.evidence
    if isinstance(evidence, SieveReport):
        evidence = _sieve_payload(evidence)
    return {"status": verdict.status, "proved": verdict.proved, "evidence": evidence}


def _verdict_text(verdict: Verdict) -> list[str]:
    lines = [f"status={verdict.status} proved={verdict.proved}"]
    if isinstance(verdict.evidence, SieveReport):
        lines.extend(_sieve_text(verdict.evidence))
    elif verdict.evidence is not None:
        lines.append(str(verdict.evidence))
    return lines


def _table_csv_row(ev: RowEvaluation) -> list[str]:
    report = ev.report
    big_delta = "-" if report.Delta is None else f"{report.Delta.numerator}/{report.Delta.denominator}"
    return [
        str(ev.row.q),
        str(ev.row.n),
        ";".join(map(str, ev.row.primes)),
        str(ev.row.omega_l),
        report.delta_float,
        big_delta,
        report.threshold if report.threshold is not None else "-",
        ev.row.reference_delta,
        ev.row.reference_threshold,
        f"{ev.threshold_deviation:.6f}",
        "true" if ev.passes and ev.primes_match and ev.delta_match else "false",
    ]


def _table_json_row(ev: RowEvaluation) -> dict:
    report = ev.report
    return {
        "q": ev.row.q,
        "n": ev.row.n,
        "primes": [_int_json(p) for p in ev.row.primes],
        "omega_l": ev.row.omega_l,
        "delta": report.delta_float,
        "Delta": _fraction_json(report.Delta),
        "threshold": report.threshold,
        "reference_delta": ev.row.reference_delta,
        "reference_threshold": ev.row.reference_threshold,
        "deviation": f"{ev.threshold_deviation:.6f}",
        "pass": ev.passes,
        "primes_match": ev.primes_match,
        "delta_match": ev.delta_match,
    }


def _confirm_payload(summary: dict) -> dict:
    pairs = []
    for row in summary["pairs"]:
        pairs.append(
            {
                "q": row["q"],
                "n": row["n"],
                "mode": row["mode"],
                "verdict": row["verdict"],
                "min_count": None if row["min_count"] is None else _int_json(row["min_count"]),
                "max_attempts": _int_json(row["max_attempts"]),
            }
        )
    return {
        "scope": _int_json(summary["scope"]),
        "all_confirmed": summary["all_confirmed"],
        "pairs": pairs,
    }


def _confirm_csv_rows(summary: dict) -> list[list[str]]:
    return [
        [str(row[col]) if row[col] is not None else "-" for col in _PAIR_COLUMNS]
        for row in summary["pairs"]
    ]


def _figure_path(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + ".png"


def _validate_field(q: int, n: int) -> None:
    if is_prime_power(q) is None:
        raise ValueError(f"q must be a prime power, got {q}")
    if n < 1:
        raise ValueError(f"extension degree must be positive, got {n}")


def _cmd_factor(args, cfg: RunConfig) -> int:
    report = factorize(args.m, budget=cfg.factor_budget)
    if cfg.output == "json":
        _print_json("factor", cfg, _factor_payload(report))
    elif cfg.output == "text":
        print(_factor_text(report))
    else:
        raise ValueError("csv output is only available for table1 and confirm-exceptions")
    return 0


def _cmd_sieve(args, cfg: RunConfig) -> int:
    _validate_field(args.q, args.n)
    f = factorize(args.q**args.n - 1, budget=cfg.factor_budget)
    if args.l is not None:
        report = sieve_eval(args.q, args.n, f, args.l)
    else:
        report = find_witness(args.q, args.n, f, args.strategy, cfg.subset_bits)
    if report is None:
        if cfg.output == "json":
            _print_json("sieve", cfg, "no witness")
        elif cfg.output == "text":
            print("no witness")
        else:
            raise ValueError("csv output is only available for table1 and confirm-exceptions")
        return 1
    if cfg.output == "json":
        _print_json("sieve", cfg, _sieve_payload(report))
    elif cfg.output == "text":
        print("\n".join(_sieve_text(report)))
    else:
        raise ValueError("csv output is only available for table1 and confirm-exceptions")
    return 0 if report.passes else 1


def _cmd_decide(args, cfg: RunConfig) -> int:
    verdict = decide(
        args.q,
        args.n,
        max_subset_bits=cfg.subset_bits,
        factor_budget=cfg.factor_budget,
    )
    if cfg.output == "json":
        _print_json("decide", cfg, _verdict_payload(verdict))
    elif cfg.output == "text":
        print("\n".join(_verdict_text(verdict)))
    else:
        raise ValueError("csv output is only available for table1 and confirm-exceptions")
    return 0 if verdict.proved else 1


def _cmd_verify(args, cfg: RunConfig) -> int:
    report = verify_pair(
        args.q,
        args.n,
        mode=args.mode,
        seed=cfg.seed,
        budget=cfg.witness_budget,
        threads=cfg.threads,
        enum_bound=cfg.enum_bound,
    )
    if cfg.output == "json":
        _print_json("verify", cfg, _verify_payload(report))
    elif cfg.output == "text":
        print("\n".join(_verify_text(report)))
    else:
        raise ValueError("csv output is only available for table1 and confirm-exceptions")
    return 0 if report.verdict == IN_P else 1


def _cmd_table1(args, cfg: RunConfig) -> int:
    evaluations = evaluate_all(cfg.factor_budget)
    all_ok = all(ev.passes and ev.primes_match and ev.delta_match for ev in evaluations)
    csv_rows = [_table_csv_row(ev) for ev in evaluations]
    if cfg.output == "csv":
        _write_csv(sys.stdout, _TABLE_COLUMNS, csv_rows)
    elif cfg.output == "json":
        result = {
            "rows": [_table_json_row(ev) for ev in evaluations],
            "all_pass": all_ok,
            "max_deviation": f"{max(ev.threshold_deviation for ev in evaluations):.6f}",
        }
        _print_json("table1", cfg, result)
    else:
        worst = max(evaluations, key=lambda ev: ev.threshold_deviation)
        print(f"rows={len(evaluations)} all_pass={all_ok}")
        print(
            f"max_deviation={worst.threshold_deviation:.6f} "
            f"at q={worst.row.q} n={worst.row.n}"
        )
        for ev in evaluations:
            if not (ev.passes and ev.primes_match and ev.delta_match):
                print(f"failing row: q={ev.row.q} n={ev.row.n}")
    if args.csv_path:
        with open(args.csv_path, "w", newline="") as handle:
            _write_csv(handle, _TABLE_COLUMNS, csv_rows)
        from . import plots

        plots.render_table_figure(evaluations, _figure_path(args.csv_path))
    return 0 if all_ok else 1


def _cmd_confirm(args, cfg: RunConfig) -> int:
    summary = confirm_exceptions(
        scope=cfg.enum_bound,
        seed=cfg.seed,
        budget=cfg.witness_budget,
        threads=cfg.threads,
    )
    if cfg.output == "json":
        _print_json("confirm-exceptions", cfg, _confirm_payload(summary))
    elif cfg.output == "csv":
        _write_csv(sys.stdout, _PAIR_COLUMNS, _confirm_csv_rows(summary))
    else:
        for row in summary["pairs"]:
            print(
                f"q={row['q']} n={row['n']} mode={row['mode']} verdict={row['verdict']}"
            )
        print(f"all_confirmed={summary['all_confirmed']}")
    if args.csv_path:
        with open(args.csv_path, "w", newline="") as handle:
            _write_csv(handle, _PAIR_COLUMNS, _confirm_csv_rows(summary))
        from . import plots

        plots.render_exception_figure(summary["pairs"], _figure_path(args.csv_path))
    return 0 if summary["all_confirmed"] else 1


def _cmd_charsum(args, cfg: RunConfig) -> int:
    audit = audit_field(args.q, args.n)
    if cfg.output == "json":
        _print_json("charsum", cfg, audit)
    elif cfg.output == "text":
        for key in sorted(audit):
            print(f"{key}={audit[key]}")
    else:
        raise ValueError("csv output is only available for table1 and confirm-exceptions")
    ok = all(value is not False for key, value in audit.items() if key.endswith("_ok"))
    return 0 if ok else 1


_DISPATCH = {
    "factor": _cmd_factor,
    "sieve": _cmd_sieve,
    "decide": _cmd_decide,
    "verify": _cmd_verify,
    "table1": _cmd_table1,
    "confirm-exceptions": _cmd_confirm,
    "charsum": _cmd_charsum,
}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _prime_list(text: str) -> tuple[int, ...]:
    try:
        items = tuple(int(token) for token in text.split(",") if token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not items:
        raise argparse.ArgumentTypeError("expected at least one prime")
    return items


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="witness search seed")
    common.add_argument(
        "--threads", type=_positive_int, default=None, help="worker threads (default: auto)"
    )
    common.add_argument(
        "--factor-budget",
        type=_positive_int,
        default=DEFAULT_FACTOR_BUDGET,
        help="trial-division and Pollard rho effort cap",
    )
    common.add_argument(
        "--enum-bound",
        type=_positive_int,
        default=DEFAULT_ENUM_BOUND,
        help="largest field size enumerated exhaustively",
    )
    common.add_argument(
        "--witness-budget",
        type=_positive_int,
        default=DEFAULT_WITNESS_BUDGET,
        help="random draws per trace value in witness mode",
    )
    common.add_argument(
        "--subset-bits",
        type=_positive_int,
        default=DEFAULT_SUBSET_BITS,
        help="prime-count cap for exhaustive sieve splits",
    )
    common.add_argument(
        "--output",
        choices=_OUTPUT_FORMATS,
        default=None,
        help="stdout format (default: json; table1 defaults to csv)",
    )

    parser = argparse.ArgumentParser(
        prog="primpair",
        description=(
            "Decide and verify which field extensions contain a primitive "
            "element alpha with alpha + 1/alpha primitive and every subfield "
            "trace value attained."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", parents=[common], help="factor an integer")
    p.add_argument("m", type=int, help="integer to factor")

    p = sub.add_parser(
        "sieve", parents=[common], help="evaluate or search the sieve criterion"
    )
    p.add_argument("q", type=int, help="subfield size (prime power)")
    p.add_argument("n", type=int, help="extension degree")
    p.add_argument(
        "--strategy",
        choices=("prefix", "exhaustive"),
        default="prefix",
        help="split search order when --l is not given",
    )
    p.add_argument(
        "--l",
        type=_prime_list,
        default=None,
        metavar="P1,P2,...",
        help="evaluate exactly this prime split instead of searching",
    )

    p = sub.add_parser(
        "decide", parents=[common], help="strongest membership proof without enumeration"
    )
    p.add_argument("q", type=int, help="subfield size (prime power)")
    p.add_argument("n", type=int, help="extension degree")

    p = sub.add_parser(
        "verify", parents=[common], help="ground-truth check by enumeration or witness search"
    )
    p.add_argument("q", type=int, help="subfield size (prime power)")
    p.add_argument("n", type=int, help="extension degree")
    p.add_argument(
        "--mode",
        choices=("count", "witness", "exception"),
        default="count",
        help="exhaustive counts, random witnesses, or exception confirmation",
    )

    p = sub.add_parser(
        "table1", parents=[common], help="recompute the reference survey table"
    )
    p.add_argument(
        "--csv", dest="csv_path", default=None, metavar="PATH",
        help="also write the table to PATH and a figure alongside it",
    )

    p = sub.add_parser(
        "confirm-exceptions",
        parents=[common],
        help="confirm membership for every pair the sieve criteria leave open",
    )
    p.add_argument(
        "--csv", dest="csv_path", default=None, metavar="PATH",
        help="also write the pair table to PATH and a figure alongside it",
    )

    p = sub.add_parser(
        "charsum", parents=[common], help="character-sum audit of one small field"
    )
    p.add_argument("q", type=int, help="subfield size (prime power)")
    p.add_argument("n", type=int, help="extension degree")

    return parser


def _config_from_args(args) -> RunConfig:
    output = args.output or _DEFAULT_OUTPUT.get(args.command, "json")
    return RunConfig(
        seed=args.seed,
        threads=args.threads,
        factor_budget=args.factor_budget,
        enum_bound=args.enum_bound,
        witness_budget=args.witness_budget,
        subset_bits=args.subset_bits,
        output=output,
    )


def main(argv=None) -> int:
    start = time.perf_counter()
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        code = _DISPATCH[args.command](args, cfg)
    except (ValueError, ArithmeticError, IncompleteFactorizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = 2
    print(f"elapsed_ms={int((time.perf_counter() - start) * 1000)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
