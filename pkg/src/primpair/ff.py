"""Finite field towers F_p <= F_q <= F_{q^n} with exact, deterministic choices.

The extension F_{q^n} is realized as F_p[x]/(f) of degree d = k*n where
q = p**k.  The modulus f is the lexicographically smallest monic irreducible
polynomial of degree d, where candidates are compared by their non-leading
coefficient tuple (c_0, ..., c_{d-1}) with c_0 most significant; candidates
with c_0 = 0 are divisible by x and are skipped outright.  The canonical
multiplicative generator is the lexicographically smallest primitive element
under the same tuple order.

Elements are immutable coefficient tuples over F_p (low degree first).  The
convention throughout the package: zero is never e-free, not even for e = 1.
"""

from __future__ import annotations

from itertools import product

from .numtheory import Factorization, factorize, is_prime_power

MAX_TOWER_DEGREE = 64
DLOG_TABLE_CAP = 1 << 16

_TOWER_CACHE: dict[tuple[int, int], "FieldTower"] = {}


def _pmul(a, b, f, p):
    """Product of coefficient tuples a, b modulo the monic polynomial f."""
    d = len(f)
    r = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                r[i + j] += ai * bj
    for i in range(2 * d - 2, d - 1, -1):
        c = r[i] % p
        if c:
            base = i - d
            for j, fj in enumerate(f):
                if fj:
                    r[base + j] -= c * fj
    return tuple(x % p for x in r[:d])


def _ppow(a, e, f, p):
    d = len(f)
    r = (1,) + (0,) * (d - 1)
    b = a
    while e:
        if e & 1:
            r = _pmul(r, b, f, p)
        e >>= 1
        if e:
            b = _pmul(b, b, f, p)
    return r


def _poly_gcd_is_one(u, v, p):
    """Whether gcd(u, v) = 1 for coefficient lists over F_p (low first)."""

    def trim(w):
        while w and w[-1] % p == 0:
            w.pop()
        return w

    u, v = trim(list(u)), trim(list(v))
    while v:
        # u mod v, with v made monic on the fly
        inv = pow(v[-1], p - 2, p) if p > 2 else v[-1]
        dv = len(v) - 1
        while len(u) - 1 >= dv and u:
            c = u[-1] * inv % p
            off = len(u) - 1 - dv
            if c:
                for j, vj in enumerate(v):
                    u[off + j] = (u[off + j] - c * vj) % p
            u = trim(u)
            if not u:
                break
        u, v = v, u
    return len(u) == 1  # nonzero constant


def _is_irreducible(coeffs, p):
    """Irreducibility of x^d + sum coeffs[i] x^i over F_p.

    f is irreducible iff gcd(x^(p^j) - x, f) = 1 for every j <= d/2: any
    proper factorization contains an irreducible factor of degree <= d/2,
    and x^(p^j) - x is the product of all irreducibles of degree dividing j.
    """
    d = len(coeffs)
    if d == 1:
        return True
    f = list(coeffs)
    h = (0, 1) + (0,) * (d - 2)
    x = h
    for _ in range(d // 2):
        h = _ppow(h, p, f, p)
        diff = [(hi - xi) % p for hi, xi in zip(h, x)]
        if not _poly_gcd_is_one(diff, f + [1], p):
            return False
    return True


def _lex_smallest_modulus(p, d):
    """Non-leading coefficients of the canonical degree-d modulus over F_p."""
    if d == 1:
        return (1,)  # x + 1
    for head in range(1, p):
        for tail in product(range(p), repeat=d - 1):
            cand = (head,) + tail
            if _is_irreducible(cand, p):
                return cand
    raise RuntimeError(f"no irreducible polynomial found for p={p}, d={d}")


class FieldElement:
    """An element of a FieldTower, an immutable coefficient tuple over F_p."""

    __slots__ = ("tower", "coeffs")

    def __init__(self, tower: "FieldTower", coeffs: tuple[int, ...]):
        self.tower = tower
        self.coeffs = coeffs

    def _check(self, other):
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")
        if (self.tower.q, self.tower.n) != (other.tower.q, other.tower.n):
            raise ValueError(
                f"mixed towers: F_{self.tower.q}^{self.tower.n} vs "
                f"F_{other.tower.q}^{other.tower.n}"
            )

    def __add__(self, other):
        self._check(other)
        p = self.tower.p
        return FieldElement(
            self.tower,
            tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other):
        self._check(other)
        p = self.tower.p
        return FieldElement(
            self.tower,
            tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self):
        p = self.tower.p
        return FieldElement(self.tower, tuple(-a % p for a in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        t = self.tower
        return FieldElement(t, _pmul(self.coeffs, other.coeffs, t._f, t.p))

    def __truediv__(self, other):
        self._check(other)
        return self * other.inverse()

    def __pow__(self, e: int):
        t = self.tower
        if e < 0:
            return FieldElement(t, _ppow(self.inverse().coeffs, -e, t._f, t.p))
        return FieldElement(t, _ppow(self.coeffs, e, t._f, t.p))

    def inverse(self):
        if not any(self.coeffs):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        t = self.tower
        return FieldElement(t, _ppow(self.coeffs, t.order - 2, t._f, t.p))

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            return NotImplemented
        return (
            (self.tower.q, self.tower.n) == (other.tower.q, other.tower.n)
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.tower.q, self.tower.n, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    @property
    def code(self) -> int:
        """The element packed as an integer in base p, c_0 least significant."""
        p = self.tower.p
        c = 0
        for a in reversed(self.coeffs):
            c = c * p + a
        return c

    def is_primitive(self) -> bool:
        return self.tower.is_primitive(self)

    def multiplicative_order(self) -> int:
        if not self:
            raise ZeroDivisionError("zero element has no multiplicative order")
        t = self.tower
        order = t.order - 1
        for ell, e in t.order_factorization.factors:
            for _ in range(e):
                if self ** (order // ell) == t.one:
                    order //= ell
                else:
                    break
        return order

    def __repr__(self):
        t = self.tower
        terms = []
        for i, a in enumerate(self.coeffs):
            if a:
                if i == 0:
                    terms.append(str(a))
                else:
                    head = "" if a == 1 else str(a)
                    terms.append(f"{head}x^{i}" if i > 1 else f"{head}x")
        body = " + ".join(terms) if terms else "0"
        return f"<{body} in F_{t.q}^{t.n}>"


class FieldTower:
    """The tower F_p <= F_q <= F_{q^n} with deterministic modulus and generator."""

    def __init__(self, q: int, n: int):
        pk = is_prime_power(q)
        if pk is None:
            raise ValueError(f"q must be a prime power, got {q}")
        if n < 1:
            raise ValueError(f"extension degree must be positive, got {n}")
        self.q = q
        self.n = n
        self.p, self.k = pk
        self.degree = self.k * n
        if self.degree > MAX_TOWER_DEGREE:
            raise ValueError(
                f"tower degree {self.degree} exceeds the supported cap "
                f"{MAX_TOWER_DEGREE}"
            )
        self.order = q**n  # number of elements of the top field
        self.modulus = _lex_smallest_modulus(self.p, self.degree)
        self._f = list(self.modulus)
        self.zero = FieldElement(self, (0,) * self.degree)
        self.one = FieldElement(self, (1,) + (0,) * (self.degree - 1))
        self.order_factorization: Factorization = factorize(self.order - 1)
        self.generator = self._find_generator()
        self._frob_matrix: tuple[tuple[int, ...], ...] | None = None
        self._trace_matrix: tuple[tuple[int, ...], ...] | None = None
        self._subfield: list[FieldElement] | None = None
        self._dlog: dict[int, int] | None = None

    @classmethod
    def get(cls, q: int, n: int) -> "FieldTower":
        """Shared cached tower for (q, n); safe because towers are immutable."""
        key = (q, n)
        tower = _TOWER_CACHE.get(key)
        if tower is None:
            tower = _TOWER_CACHE[key] = cls(q, n)
        return tower

    # -- construction helpers ------------------------------------------------

    def element(self, coeffs) -> FieldElement:
        c = tuple(int(a) % self.p for a in coeffs)
        if len(c) != self.degree:
            raise ValueError(
                f"need {self.degree} coefficients for F_{self.q}^{self.n}, "
                f"got {len(c)}"
            )
        return FieldElement(self, c)

    def from_code(self, code: int) -> FieldElement:
        if not 0 <= code < self.order:
            raise ValueError(f"element code {code} out of range [0, {self.order})")
        coeffs = []
        for _ in range(self.degree):
            code, r = divmod(code, self.p)
            coeffs.append(r)
        return FieldElement(self, tuple(coeffs))

    def from_prime_subfield(self, value: int) -> FieldElement:
        return FieldElement(
            self, (value % self.p,) + (0,) * (self.degree - 1)
        )

    def _find_generator(self) -> FieldElement:
        for coeffs in product(range(self.p), repeat=self.degree):
            if any(coeffs):
                cand = FieldElement(self, coeffs)
                if self.is_primitive(cand):
                    return cand
        raise RuntimeError("no primitive element found")  # unreachable

    # -- freeness ------------------------------------------------------------

    def is_e_free(self, a: FieldElement, e: int) -> bool:
        """Whether a is e-free: a != 0 and a is no d-th power for d | e, d > 1.

        Requires e | order - 1.  Zero is never e-free, not even for e = 1.
        """
        if e < 1:
            raise ValueError(f"e must be a positive divisor of Q - 1, got {e}")
        if (self.order - 1) % e:
            raise ValueError(f"e = {e} does not divide {self.order - 1}")
        if not a:
            return False
        top = self.order - 1
        for ell in self.order_factorization.primes:
            if e % ell == 0 and a ** (top // ell) == self.one:
                return False
        return True

    def is_primitive(self, a: FieldElement) -> bool:
        return self.is_e_free(a, self.order - 1)

    # -- linear maps over F_p ------------------------------------------------

    @property
    def frobenius_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Matrix M with M @ v = coefficients of v**p, rows over F_p."""
        if self._frob_matrix is None:
            d, p = self.degree, self.p
            cols = []
            for j in range(d):
                basis = (0,) * j + (1,) + (0,) * (d - 1 - j)
                cols.append(_ppow(basis, p, self._f, p))
            self._frob_matrix = tuple(
                tuple(cols[j][i] for j in range(d)) for i in range(d)
            )
        return self._frob_matrix

    def _mat_mul(self, A, B):
        d, p = self.degree, self.p
        Bt = list(zip(*B))
        return tuple(
            tuple(sum(a * b for a, b in zip(row, col)) % p for col in Bt)
            for row in A
        )

    def _mat_vec(self, A, v):
        p = self.p
        return tuple(sum(a * b for a, b in zip(row, v)) % p for row in A)

    def mul_matrix(self, h: FieldElement) -> tuple[tuple[int, ...], ...]:
        """Matrix M with M @ v = coefficients of h * v."""
        d = self.degree
        cols = []
        cur = h.coeffs
        for j in range(d):
            cols.append(cur)
            if j < d - 1:
                cur = _pmul(cur, (0, 1) + (0,) * (d - 2), self._f, self.p)
        return tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))

    @property
    def trace_matrix(self) -> tuple[tuple[int, ...], ...]:
        """Matrix of the trace map onto the q-element subfield."""
        if self._trace_matrix is None:
            d = self.degree
            Fq = self.frobenius_matrix
            for _ in range(self.k - 1):
                Fq = self._mat_mul(Fq, self.frobenius_matrix)
            ident = tuple(
                tuple(1 if i == j else 0 for j in range(d)) for i in range(d)
            )
            acc = ident
            term = ident
            for _ in range(self.n - 1):
                term = self._mat_mul(term, Fq)
                acc = tuple(
                    tuple((a + b) % self.p for a, b in zip(ra, rb))
                    for ra, rb in zip(acc, term)
                )
            self._trace_matrix = acc
        return self._trace_matrix

    def trace(self, a: FieldElement) -> FieldElement:
        """Trace of a onto the q-element subfield, as an element of the tower."""
        return FieldElement(self, self._mat_vec(self.trace_matrix, a.coeffs))

    def absolute_trace(self, a: FieldElement) -> int:
        """Trace of a all the way down to F_p, as an integer in [0, p)."""
        p = self.p
        total = list(a.coeffs)
        x = a.coeffs
        for _ in range(self.degree - 1):
            x = self._mat_vec(self.frobenius_matrix, x)
            for i, xi in enumerate(x):
                total[i] += xi
        if any(t % p for t in total[1:]):
            raise AssertionError("absolute trace landed outside the prime field")
        return total[0] % p

    def subfield_absolute_trace(self, a: FieldElement) -> int:
        """Trace from the q-element subfield down to F_p, for a with a^q = a."""
        p = self.p
        total = list(a.coeffs)
        x = a.coeffs
        for _ in range(self.k - 1):
            x = self._mat_vec(self.frobenius_matrix, x)
            for i, xi in enumerate(x):
                total[i] += xi
        if any(t % p for t in total[1:]):
            raise ValueError("element is not in the q-element subfield")
        return total[0] % p

    # -- subfield ------------------------------------------------------------

    def is_in_subfield(self, a: FieldElement) -> bool:
        return a ** self.q == a

    def subfield_elements(self) -> list[FieldElement]:
        """The q elements of the intermediate subfield, ascending by code."""
        if self._subfield is None:
            span = (self.order - 1) // (self.q - 1)
            g_s = self.generator**span
            els = [self.zero, self.one]
            x = g_s
            while x != self.one:
                els.append(x)
                x = x * g_s
            els.sort(key=lambda e: e.code)
            self._subfield = els
        return list(self._subfield)

    # -- discrete logarithms ---------------------------------------------------

    def discrete_log_table(self) -> dict[int, int]:
        """element code -> exponent of the canonical generator; small fields only."""
        if self.order > DLOG_TABLE_CAP:
            raise ValueError(
                f"discrete log table capped at order {DLOG_TABLE_CAP}, "
                f"field has {self.order}"
            )
        if self._dlog is None:
            table = {}
            x = self.one
            for i in range(self.order - 1):
                table[x.code] = i
                x = x * self.generator
            self._dlog = table
        return dict(self._dlog)

    def __eq__(self, other):
        if not isinstance(other, FieldTower):
            return NotImplemented
        return (self.q, self.n) == (other.q, other.n)

    def __hash__(self):
        return hash((self.q, self.n))

    def __repr__(self):
        return (
            f"FieldTower(q={self.q}, n={self.n}, p={self.p}, "
            f"degree={self.degree})"
        )
