"""Existence criteria for primitive pairs with prescribed trace, no field arithmetic.

Everything here decides the membership question through exact integer and
rational inequalities on the factorization of q^n - 1: the basic criterion,
the prime sieve criterion with a chosen divisor l, the degree-5 splitting of
q^5 - 1, the Mersenne shortcut for q = 2, and worst-case delta constants.

The pass decision q^(n/2-1) > C_q W(l)^2 Delta is always made exactly by
comparing q^(n-2) against the square of the right side as rationals; the
displayed threshold R^(2/(n-2)) is computed in high precision for reporting
only and never feeds a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

import mpmath

from .numtheory import (
    DEFAULT_FACTOR_BUDGET,
    Factorization,
    factorize,
    is_prime_power,
    is_probable_prime,
    squarefree_divisor_count,
)

DEFAULT_SUBSET_BITS = 20
NQ_LIMIT = 2 * 10**31
THRESHOLD_PRECISION_BITS = 113


def cq(q: int) -> int:
    """Character-sum constant: 3 for odd q, 2 for even q."""
    if is_prime_power(q) is None:
        raise ValueError(f"q must be a prime power, got {q}")
    return 2 if q % 2 == 0 else 3


@dataclass(frozen=True)
class SieveReport:
    """Outcome of one sieve evaluation for a fixed split of the radical primes.

    delta and Delta are exact rationals; Delta, R and threshold are None when
    delta <= 0 (the criterion is then unusable and passes is False).
    delta_float and threshold are 6-decimal renderings for reports only.
    """

    q: int
    n: int
    cq: int
    l_primes: tuple[int, ...]
    sieve_primes: tuple[int, ...]
    r: int
    delta: Fraction
    delta_float: str
    Delta: Fraction | None
    R: Fraction | None
    threshold: str | None
    passes: bool

    @property
    def w_l(self) -> int:
        return 1 << len(self.l_primes)


@dataclass(frozen=True)
class Verdict:
    """Decision for (q, n) membership with the strongest evidence found."""

    status: str
    evidence: SieveReport | str | None = None

    PROVED_BASIC: ClassVar[str] = "PROVED_BASIC"
    PROVED_SIEVE: ClassVar[str] = "PROVED_SIEVE"
    PROVED_MERSENNE: ClassVar[str] = "PROVED_MERSENNE"
    UNRESOLVED: ClassVar[str] = "UNRESOLVED"
    NOT_APPLICABLE: ClassVar[str] = "NOT_APPLICABLE"

    @property
    def proved(self) -> bool:
        return self.status.startswith("PROVED_")


def pair_criterion(q: int, n: int, f1: Factorization, f2: Factorization) -> bool:
    """Exact check of q^(n/2-1) > C_q * W(l1) * W(l2) for l1, l2 | q^n - 1.

    Compared as q^(n-2) > (C_q W(l1) W(l2))^2 in integers, so half-integer
    exponents never touch floating point.
    """
    m = q**n - 1
    if m % f1.value or m % f2.value:
        raise ValueError(
            f"l1={f1.value}, l2={f2.value} must both divide q^n-1={m}"
        )
    rhs = cq(q) * squarefree_divisor_count(f1) * squarefree_divisor_count(f2)
    return q ** (n - 2) > rhs * rhs if n >= 2 else Fraction(1, q) > rhs * rhs


def basic_criterion(q: int, n: int, f: Factorization) -> bool:
    """pair_criterion with l1 = l2 = q^n - 1 (no sieving primes at all)."""
    if f.value != q**n - 1:
        raise ValueError(f"factorization is of {f.value}, expected {q**n - 1}")
    return pair_criterion(q, n, f, f)


def _format_threshold(R: Fraction, n: int) -> str | None:
    if n <= 2:
        return None
    with mpmath.workprec(THRESHOLD_PRECISION_BITS):
        value = (
            mpmath.mpf(R.numerator) / mpmath.mpf(R.denominator)
        ) ** (mpmath.mpf(2) / (n - 2))
        return f"{float(value):.6f}"


def sieve_eval(
    q: int, n: int, f: Factorization, l_primes
) -> SieveReport:
    """Evaluate the sieve criterion with l = the product of l_primes.

    l_primes must be a subset of the distinct primes of q^n - 1; the
    remaining primes become the sieving primes p_1..p_r with
    delta = 1 - 2 sum 1/p_i and Delta = (2r-1)/delta + 2.  The verdict is
    the exact inequality q^(n/2-1) > cq(q) * W(l)^2 * Delta.
    """
    if f.value != q**n - 1:
        raise ValueError(f"factorization is of {f.value}, expected {q**n - 1}")
    radical = f.primes
    chosen = tuple(sorted(set(l_primes)))
    if not set(chosen) <= set(radical):
        raise ValueError(
            f"l primes {sorted(set(chosen) - set(radical))} do not divide q^n-1"
        )
    sieve_primes = tuple(p for p in radical if p not in set(chosen))
    r = len(sieve_primes)
    delta = 1 - 2 * sum(Fraction(1, p) for p in sieve_primes)
    c = cq(q)
    w = 1 << len(chosen)
    if delta <= 0:
        return SieveReport(
            q=q,
            n=n,
            cq=c,
            l_primes=chosen,
            sieve_primes=sieve_primes,
            r=r,
            delta=delta,
            delta_float=f"{float(delta):.6f}",
            Delta=None,
            R=None,
            threshold=None,
            passes=False,
        )
    big_delta = Fraction(2 * r - 1, 1) / delta + 2
    R = c * w * w * big_delta
    passes = Fraction(q) ** (n - 2) > R * R
    return SieveReport(
        q=q,
        n=n,
        cq=c,
        l_primes=chosen,
        sieve_primes=sieve_primes,
        r=r,
        delta=delta,
        delta_float=f"{float(delta):.6f}",
        Delta=big_delta,
        R=R,
        threshold=_format_threshold(R, n),
        passes=passes,
    )


def find_witness(
    q: int,
    n: int,
    f: Factorization,
    strategy: str = "prefix",
    max_subset_bits: int = DEFAULT_SUBSET_BITS,
) -> SieveReport | None:
    """Search for a prime split that makes the sieve criterion pass.

    prefix: try l = the t smallest primes of q^n - 1 for t = omega down to 0
    and return the first passing report.  exhaustive: scan all 2^omega
    subsets (rejected when omega exceeds max_subset_bits) and return the
    passing report minimizing W(l)^2 * Delta, ties broken by the
    lexicographically smallest l_primes tuple.  None when nothing passes.
    """
    if strategy not in ("prefix", "exhaustive"):
        raise ValueError(f"unknown strategy {strategy!r}")
    radical = f.primes
    w = len(radical)
    if strategy == "prefix":
        for t in range(w, -1, -1):
            report = sieve_eval(q, n, f, radical[:t])
            if report.passes:
                return report
        return None
    if w > max_subset_bits:
        raise ValueError(
            f"exhaustive search over {w} primes exceeds the subset cap "
            f"{max_subset_bits}"
        )
    inv = [Fraction(2, p) for p in radical]
    best_key: tuple[Fraction, tuple[int, ...]] | None = None
    best: SieveReport | None = None
    # Gray-code walk: one membership flip per step keeps the sieving sum
    # incremental (subset bit set = prime belongs to l, not to the sieve).
    sieve_sum = sum(inv, Fraction(0))  # l empty: everything sieves
    mask = 0
    for t in range(1 << w):
        gray = t ^ (t >> 1)
        flip = gray ^ mask
        if flip:
            bit = flip.bit_length() - 1
            if gray & flip:
                sieve_sum -= inv[bit]  # prime moved into l
            else:
                sieve_sum += inv[bit]
            mask = gray
        delta = 1 - sieve_sum
        if delta <= 0:
            continue
        r = w - mask.bit_count()
        big_delta = Fraction(2 * r - 1, 1) / delta + 2
        wl = 1 << mask.bit_count()
        R = cq(q) * wl * wl * big_delta
        if not Fraction(q) ** (n - 2) > R * R:
            continue
        chosen = tuple(p for i, p in enumerate(radical) if mask >> i & 1)
        key = (Fraction(wl * wl) * big_delta, chosen)
        if best_key is None or key < best_key:
            best_key = key
            best = sieve_eval(q, n, f, chosen)
    return best


def mersenne_shortcut(q: int, n: int) -> bool:
    """True iff q = 2 and 2^n - 1 is a Mersenne prime of at least 7."""
    if q != 2:
        return False
    m = 2**n - 1
    return m >= 7 and is_probable_prime(m)


def n5_split(q: int, f: Factorization) -> tuple[Factorization, Factorization]:
    """Split q^5 - 1 into q1 (primes dividing q - 1) and the cofactor q2.

    q1 collects the full prime-power part of q^5 - 1 supported on primes of
    q - 1; q2 is the complement.  Asserts the structural claim that every
    prime of q2 is congruent to 1 mod 10 or equals 5, and raises loudly if
    a counterexample ever appears.
    """
    if f.value != q**5 - 1:
        raise ValueError(f"factorization is of {f.value}, expected {q**5 - 1}")
    q1_factors = tuple((p, e) for p, e in f.factors if (q - 1) % p == 0)
    q2_factors = tuple((p, e) for p, e in f.factors if (q - 1) % p != 0)
    q1 = Factorization(
        math.prod(p**e for p, e in q1_factors), q1_factors
    )
    q2 = Factorization(
        math.prod(p**e for p, e in q2_factors), q2_factors
    )
    offenders = [p for p, _ in q2_factors if p % 10 != 1 and p != 5]
    if offenders:
        raise AssertionError(
            f"q2 primes {offenders} for q={q} are neither 1 mod 10 nor 5; "
            "this falsifies the degree-5 splitting claim"
        )
    return q1, q2


def worst_case_delta(l_count: int, sieve_prime_list) -> Fraction:
    """Exact delta = 1 - 2 sum 1/p over an explicit sieving prime list.

    l_count is the number of primes reserved for l in the originating
    argument; it is accepted for interface completeness and does not enter
    the value.  The caller checks positivity.
    """
    if l_count < 0:
        raise ValueError("l_count must be non-negative")
    primes = list(sieve_prime_list)
    if len(set(primes)) != len(primes):
        raise ValueError("sieving primes must be distinct")
    return 1 - 2 * sum(Fraction(1, p) for p in primes)


def nq_threshold(q: int) -> int:
    """Least n with q^n > 2 * 10^31, by exact integer arithmetic."""
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    n = 1
    power = q
    while power <= NQ_LIMIT:
        power *= q
        n += 1
    return n


def decide(
    q: int,
    n: int,
    *,
    max_subset_bits: int = DEFAULT_SUBSET_BITS,
    factor_budget: int = DEFAULT_FACTOR_BUDGET,
) -> Verdict:
    """Strongest membership proof available for (q, n) without enumeration.

    Order: degrees 1 and 2 are NOT_APPLICABLE (no qualifying pair exists);
    then the Mersenne shortcut, the basic criterion, the prefix sieve
    search, and the exhaustive sieve search (when the prime count fits
    max_subset_bits).  UNRESOLVED means every criterion failed, not that
    (q, n) is out; factorization budget errors propagate.
    """
    if is_prime_power(q) is None:
        raise ValueError(f"q must be a prime power, got {q}")
    if n < 1:
        raise ValueError(f"extension degree must be positive, got {n}")
    if n <= 2:
        return Verdict(
            Verdict.NOT_APPLICABLE,
            "degrees 1 and 2 admit no primitive pair for every trace",
        )
    if mersenne_shortcut(q, n):
        return Verdict(
            Verdict.PROVED_MERSENNE, f"2^{n} - 1 = {2**n - 1} is prime"
        )
    f = factorize(q**n - 1, budget=factor_budget)
    if basic_criterion(q, n, f):
        return Verdict(Verdict.PROVED_BASIC, sieve_eval(q, n, f, f.primes))
    report = find_witness(q, n, f, "prefix", max_subset_bits)
    if report is None and len(f.primes) <= max_subset_bits:
        report = find_witness(q, n, f, "exhaustive", max_subset_bits)
    if report is not None:
        return Verdict(Verdict.PROVED_SIEVE, report)
    return Verdict(Verdict.UNRESOLVED)
