"""Exact integer arithmetic helpers: factorization and multiplicative functions.

Everything here is deterministic.  Factorization uses trial division by primes
below 10**6, a deterministic Miller-Rabin test below 2**64, a fixed-seed
40-round Miller-Rabin test above, and Brent's variant of the Pollard rho walk
for composite cofactors, with an explicit iteration budget.  A budget overrun
raises IncompleteFactorizationError instead of returning a wrong answer.

All derived quantities (omega, W, phi, mu, theta) are computed from the
factorization with exact integer / Fraction arithmetic; no floats.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

TRIAL_DIVISION_LIMIT = 10**6
DEFAULT_FACTOR_BUDGET = 10**8

# Bases giving a deterministic Miller-Rabin answer for all n < 3.3e24 > 2**64.
_MR_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_PROBABILISTIC_ROUNDS = 40
_SEED_SALT = 0x9E3779B97F4A7C15


class IncompleteFactorizationError(Exception):
    """Raised when the iteration budget runs out before m is fully factored."""

    def __init__(self, value: int, partial: dict[int, int], remaining: int):
        self.value = value
        self.partial = dict(partial)
        self.remaining = remaining
        super().__init__(
            f"incomplete factorization of {value}: budget exhausted with "
            f"composite cofactor {remaining} unsplit"
        )


@dataclass(frozen=True)
class Factorization:
    """A positive integer together with its full prime factorization.

    factors is a tuple of (prime, exponent) pairs with strictly ascending
    primes and exponents >= 1; the product reconstructs value exactly.
    """

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factor list for {self.value}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(
                f"factor list product {prod} does not reconstruct {self.value}"
            )

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


_sieve_primes: list[int] | None = None


def primes_up_to(limit: int) -> list[int]:
    """All primes <= limit, by a bytearray Eratosthenes sieve."""
    if limit < 2:
        return []
    mark = bytearray([1]) * (limit + 1)
    mark[0] = mark[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if mark[i]:
            mark[i * i :: i] = bytearray(len(mark[i * i :: i]))
    return [i for i in range(2, limit + 1) if mark[i]]


def first_primes(count: int) -> list[int]:
    """The first `count` primes (count >= 0)."""
    if count < 0:
        raise ValueError("count must be non-negative")
    # p_k < k (ln k + ln ln k) for k >= 6; pad generously for small k.
    bound = 16
    while True:
        ps = primes_up_to(bound)
        if len(ps) >= count:
            return ps[:count]
        bound *= 2


def _trial_primes() -> list[int]:
    global _sieve_primes
    if _sieve_primes is None:
        _sieve_primes = primes_up_to(TRIAL_DIVISION_LIMIT - 1)
    return _sieve_primes


def is_probable_prime(n: int) -> bool:
    """Primality test: deterministic below 2**64, else 40 fixed-seed MR rounds."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def witness(a: int) -> bool:
        # True when a proves n composite.
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            return False
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                return False
        return True

    if n < 1 << 64:
        return not any(witness(a) for a in _MR_DETERMINISTIC_BASES)
    rng = random.Random(n ^ _SEED_SALT)
    return not any(
        witness(rng.randrange(2, n - 1)) for _ in range(_MR_PROBABILISTIC_ROUNDS)
    )


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self, k: int) -> bool:
        self.left -= k
        return self.left >= 0


def _pollard_brent(n: int, seed: int, budget: _Budget) -> int | None:
    """One Brent-rho attempt on odd composite n; None when out of budget."""
    rng = random.Random((n << 16) ^ seed ^ _SEED_SALT)
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            steps = min(m, r - k)
            if not budget.spend(steps):
                return None
            for _ in range(steps):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += steps
        r *= 2
    if g == n:
        # Backtrack one step at a time.
        g = 1
        while g == 1:
            if not budget.spend(1):
                return None
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g if g != n else 0  # 0 signals a failed attempt (retry with new seed)


def factorize(m: int, *, budget: int = DEFAULT_FACTOR_BUDGET) -> Factorization:
    """Full prime factorization of m >= 1.

    Raises ValueError for m < 1 and IncompleteFactorizationError when the
    rho iteration budget is exhausted before the factorization completes.
    """
    if m < 1:
        raise ValueError(f"factorize requires a positive integer, got {m}")
    found: dict[int, int] = {}
    rem = m
    for p in _trial_primes():
        if p * p > rem:
            break
        while rem % p == 0:
            found[p] = found.get(p, 0) + 1
            rem //= p
    tracker = _Budget(budget)
    stack = [rem] if rem > 1 else []
    while stack:
        n = stack.pop()
        if n == 1:
            continue
        if n < TRIAL_DIVISION_LIMIT * TRIAL_DIVISION_LIMIT or is_probable_prime(n):
            # Below the trial-division square every survivor is prime.
            found[n] = found.get(n, 0) + 1
            continue
        factor = None
        for attempt in range(64):
            factor = _pollard_brent(n, attempt, tracker)
            if factor is None or factor > 1:
                break
        if factor is None:
            raise IncompleteFactorizationError(m, found, n)
        if factor in (0, 1):
            raise IncompleteFactorizationError(m, found, n)
        stack.append(factor)
        stack.append(n // factor)
    factors = tuple(sorted(found.items()))
    return Factorization(m, factors)


def omega(f: Factorization) -> int:
    """Number of distinct primes dividing the factored value."""
    return len(f.factors)


def squarefree_divisor_count(f: Factorization) -> int:
    """W(m) = 2**omega(m), the number of squarefree divisors."""
    return 1 << len(f.factors)


def euler_phi(f: Factorization) -> int:
    phi = 1
    for p, e in f.factors:
        phi *= (p - 1) * p ** (e - 1)
    return phi


def mobius(f: Factorization) -> int:
    if any(e > 1 for _, e in f.factors):
        return 0
    return -1 if len(f.factors) % 2 else 1


def theta(f: Factorization) -> Fraction:
    """phi(m)/m as an exact Fraction."""
    t = Fraction(1)
    for p, _ in f.factors:
        t *= Fraction(p - 1, p)
    return t


def radical_primes(f: Factorization) -> tuple[int, ...]:
    """Distinct primes of the factored value, ascending."""
    return f.primes


def radical(f: Factorization) -> int:
    """Product of the distinct primes of the factored value."""
    return math.prod(f.primes)


def squarefree_divisors(f: Factorization) -> list[int]:
    """All squarefree divisors of the factored value, ascending."""
    divs = [1]
    for p in f.primes:
        divs += [d * p for d in divs]
    return sorted(divs)


def divisors(f: Factorization) -> list[int]:
    """All divisors of the factored value, ascending."""
    divs = [1]
    for p, e in f.factors:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def bound_margin(f: Factorization, num: int, den: int) -> bool:
    """Exact check of W(m)**den < m**num for the factored m."""
    if num < 0 or den < 0:
        raise ValueError("exponents must be non-negative")
    w = squarefree_divisor_count(f)
    return w**den < f.value**num


def _integer_root(q: int, k: int) -> int:
    """floor(q ** (1/k)) for q >= 1, k >= 1, by Newton iteration on integers."""
    if k == 1 or q < 2:
        return q
    x = 1 << -(-q.bit_length() // k)
    while True:
        y = ((k - 1) * x + q // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def is_prime_power(q: int) -> tuple[int, int] | None:
    """(p, k) with q = p**k when q is a prime power, else None."""
    if q < 2:
        return None
    for k in range(q.bit_length(), 0, -1):
        p = _integer_root(q, k)
        if p >= 2 and p**k == q and is_probable_prime(p):
            return p, k
    return None
