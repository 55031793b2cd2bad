"""Bundled reference table of sieve evaluations and its reproduction.

The package ships a fifty-row reference table (data/table1.csv) of pairs
(q, n) proved by the sieve criterion, each with a chosen number of primes
kept in l, a quoted delta, and a quoted threshold.  This module reloads the
rows, recomputes every quantity from scratch, and measures the agreement.

Three rows carry a note documenting a correction applied during
transcription; the note preserves the original reading.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .numtheory import DEFAULT_FACTOR_BUDGET, factorize
from .sieve import SieveReport, sieve_eval

DELTA_SCALE = 10**4


@dataclass(frozen=True)
class ReferenceRow:
    """One reference-table row as shipped in the data file."""

    q: int
    n: int
    primes: tuple[int, ...]
    omega_l: int
    reference_delta: str
    reference_threshold: str
    note: str


@dataclass(frozen=True)
class RowEvaluation:
    """A reference row together with its from-scratch recomputation."""

    row: ReferenceRow
    report: SieveReport
    primes_match: bool
    delta_match: bool
    threshold_deviation: float

    @property
    def passes(self) -> bool:
        return self.report.passes


@lru_cache(maxsize=1)
def load_rows() -> tuple[ReferenceRow, ...]:
    """Parse the bundled CSV into row records, in file order."""
    text = (
        resources.files("primpair.data").joinpath("table1.csv").read_text()
    )
    rows = []
    for record in csv.DictReader(text.splitlines()):
        rows.append(
            ReferenceRow(
                q=int(record["q"]),
                n=int(record["n"]),
                primes=tuple(int(p) for p in record["primes"].split(";")),
                omega_l=int(record["omega_l"]),
                reference_delta=record["reference_delta"],
                reference_threshold=record["reference_threshold"],
                note=record["note"],
            )
        )
    return tuple(rows)


def delta_matches_reference(
    delta: Fraction, reference: str, tolerance_units: int = 1
) -> bool:
    """Compare exact delta against a quoted decimal, truncation-tolerant.

    The exact value is truncated to 4 decimals and compared in integer
    units of 10^-4; a distance of tolerance_units covers quotes that were
    truncated rather than rounded (and vice versa).
    """
    truncated = delta.numerator * DELTA_SCALE // delta.denominator
    ref_units = Fraction(reference) * DELTA_SCALE
    if ref_units.denominator != 1:
        raise ValueError(f"reference {reference!r} has more than 4 decimals")
    return abs(truncated - ref_units.numerator) <= tolerance_units


def evaluate_row(
    row: ReferenceRow, factor_budget: int = DEFAULT_FACTOR_BUDGET
) -> RowEvaluation:
    """Recompute one row with l = the omega_l smallest quoted primes."""
    f = factorize(row.q**row.n - 1, budget=factor_budget)
    report = sieve_eval(row.q, row.n, f, row.primes[: row.omega_l])
    deviation = abs(float(report.threshold) - float(row.reference_threshold))
    return RowEvaluation(
        row=row,
        report=report,
        primes_match=f.primes == row.primes,
        delta_match=delta_matches_reference(report.delta, row.reference_delta),
        threshold_deviation=deviation,
    )


def evaluate_all(
    factor_budget: int = DEFAULT_FACTOR_BUDGET,
) -> tuple[RowEvaluation, ...]:
    return tuple(evaluate_row(row, factor_budget) for row in load_rows())
