"""Exact character-sum laboratory for small fields.

Evaluates multiplicative and additive characters against the canonical
generator, the two characteristic functions built from them (freeness and
trace membership), and the mixed double sums whose size estimates power
the existence criteria.  Everything here is meant for fields small enough
to enumerate, where the identities can be checked to rounding error.

Conventions.  Multiplicative characters are indexed by an exponent j with
chi_j(g^i) = e^(2*pi*i_unit*j*i/(q^n-1)); the characters of order exactly
d are chi_j for j = (q^n-1)/d * t with gcd(t, d) = 1.  Every
multiplicative character, the trivial one included, takes the value 0 at
the zero element: this is the unique choice that makes the freeness
indicator vanish at 0 (zero is never e-free) and keeps the counting
identity in exact agreement with direct enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .ff import FieldElement, FieldTower
from .numtheory import Factorization, divisors, squarefree_divisors, theta
from .sieve import cq
from .verify import _build_tables, _sum_codes, count_na

MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"

CHI_FIELD_CAP = 1 << 14
AUDIT_WORK_CAP = 1 << 22
INDICATOR_TOL = 1e-9
COUNT_TOL = 1e-6


@dataclass(frozen=True)
class ComplexValue:
    re: float
    im: float

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return abs(complex(self.re, self.im))


@dataclass(frozen=True)
class CharacterSpec:
    """One character: multiplicative by generator exponent, additive by shift."""

    kind: str
    tower: FieldTower
    mult_index: int | None = None
    order: int | None = None
    add_param: FieldElement | None = None

    @classmethod
    def multiplicative(cls, tower: FieldTower, index: int) -> "CharacterSpec":
        m = tower.order - 1
        if not 0 <= index < m:
            raise ValueError(f"character index must lie in [0, {m - 1}]")
        order = m // math.gcd(index, m)
        return cls(MULTIPLICATIVE, tower, mult_index=index, order=order)

    @classmethod
    def trivial(cls, tower: FieldTower) -> "CharacterSpec":
        return cls.multiplicative(tower, 0)

    @classmethod
    def additive(cls, u: FieldElement) -> "CharacterSpec":
        if not u.tower.is_in_subfield(u):
            raise ValueError("additive shift must lie in the q-element subfield")
        return cls(ADDITIVE, u.tower, add_param=u)

    @property
    def is_trivial(self) -> bool:
        return self.kind == MULTIPLICATIVE and self.mult_index == 0


class _CharData:
    """Cached per-tower arrays, indexed by generator exponent."""

    __slots__ = (
        "m", "roots", "beta_dlog", "psi_top", "exponent", "trace_class",
        "prime_roots",
    )

    def __init__(self, m, roots, beta_dlog, psi_top, exponent, trace_class,
                 prime_roots):
        self.m = m
        self.roots = roots
        self.beta_dlog = beta_dlog
        self.psi_top = psi_top
        self.exponent = exponent
        self.trace_class = trace_class
        self.prime_roots = prime_roots


@lru_cache(maxsize=8)
def _field_data(tower: FieldTower) -> _CharData:
    if tower.order > CHI_FIELD_CAP:
        raise ValueError(
            f"character evaluation capped at field order {CHI_FIELD_CAP}, "
            f"got {tower.order}"
        )
    tables = _build_tables(tower, 1)
    m = tower.order - 1
    p = tower.p
    i = np.arange(m, dtype=np.int64)
    codes = tables.codes.astype(np.int64)
    beta = _sum_codes(codes, codes[(m - i) % m], p, tower.degree)
    safe = np.where(beta == 0, 0, beta)
    beta_dlog = np.where(
        beta == 0, -1, tables.exponent[safe].astype(np.int64)
    )
    roots = np.exp(2j * np.pi * i / m)
    prime_roots = np.exp(2j * np.pi * np.arange(p) / p)
    class_abs = np.array(
        [tower.subfield_absolute_trace(e) for e in tower.subfield_elements()],
        dtype=np.int64,
    )
    trace_class = tables.trace_class.astype(np.int64)
    psi_top = prime_roots[class_abs[trace_class]]
    return _CharData(
        m, roots, beta_dlog, psi_top, tables.exponent, trace_class,
        prime_roots,
    )


def _unit(numerator: int, denominator: int) -> complex:
    angle = 2.0 * math.pi * (numerator % denominator) / denominator
    return complex(math.cos(angle), math.sin(angle))


def _require_mult(spec: CharacterSpec) -> None:
    if spec.kind != MULTIPLICATIVE:
        raise ValueError("expected a multiplicative character")


def eval_mult_char(spec: CharacterSpec, alpha: FieldElement) -> ComplexValue:
    """chi_j at a nonzero element, through the generator's discrete log."""
    _require_mult(spec)
    if not alpha:
        raise ValueError("multiplicative characters are undefined at zero")
    data = _field_data(spec.tower)
    exp = int(data.exponent[alpha.code])
    value = data.roots[(spec.mult_index * exp) % data.m]
    return ComplexValue(value.real, value.imag)


def eval_add_char(u: FieldElement, x: FieldElement) -> ComplexValue:
    """Subfield-level additive character with shift u at x."""
    tower = u.tower
    for operand in (u, x):
        if not tower.is_in_subfield(operand):
            raise ValueError("additive character operands must lie in the subfield")
    t = tower.subfield_absolute_trace(u * x)
    value = _unit(t, tower.p)
    return ComplexValue(value.real, value.imag)


def eval_top_add_char(x: FieldElement) -> ComplexValue:
    """Canonical additive character of the full field at x."""
    value = _unit(x.tower.absolute_trace(x), x.tower.p)
    return ComplexValue(value.real, value.imag)


def _exact_character_indices(m: int, d: int):
    """Generator exponents j of the phi(d) characters of order exactly d."""
    base = m // d
    for t in range(1, d + 1):
        if math.gcd(t, d) == 1:
            yield (base * t) % m


def rho_indicator(alpha: FieldElement, f_m: Factorization) -> ComplexValue:
    """Freeness indicator as a character average: 1 if alpha is m-free, else 0."""
    tower = alpha.tower
    m_top = tower.order - 1
    if m_top % f_m.value:
        raise ValueError(f"{f_m.value} does not divide {m_top}")
    if not alpha:
        raise ValueError("freeness indicator is undefined at zero")
    data = _field_data(tower)
    exp = int(data.exponent[alpha.code])
    res, ims = [], []
    primes = f_m.primes
    for r in range(len(primes) + 1):
        for subset in combinations(primes, r):
            d = math.prod(subset)
            weight = (-1) ** r / math.prod(ell - 1 for ell in subset)
            for j in _exact_character_indices(m_top, d):
                value = data.roots[(j * exp) % m_top]
                res.append(weight * value.real)
                ims.append(weight * value.imag)
    scale = float(theta(f_m))
    return ComplexValue(scale * math.fsum(res), scale * math.fsum(ims))


def tau_indicator(alpha: FieldElement, a: FieldElement) -> ComplexValue:
    """Trace-membership indicator: 1 if the subfield trace of alpha is a."""
    tower = alpha.tower
    if not tower.is_in_subfield(a):
        raise ValueError("trace value must lie in the q-element subfield")
    res, ims = [], []
    for u in tower.subfield_elements():
        term = complex(eval_top_add_char(u * alpha)) * _unit(
            tower.subfield_absolute_trace(-(u * a)), tower.p
        )
        res.append(term.real)
        ims.append(term.imag)
    q = tower.q
    return ComplexValue(math.fsum(res) / q, math.fsum(ims) / q)


def _char_vectors(d1_spec, d2_spec):
    _require_mult(d1_spec)
    _require_mult(d2_spec)
    if d1_spec.tower is not d2_spec.tower:
        raise ValueError("character pair must live on one tower")
    data = _field_data(d1_spec.tower)
    i = np.arange(data.m, dtype=np.int64)
    c1 = data.roots[(d1_spec.mult_index * i) % data.m]
    clamped = np.where(data.beta_dlog < 0, 0, data.beta_dlog)
    c2 = np.where(
        data.beta_dlog < 0,
        0.0,
        data.roots[(d2_spec.mult_index * clamped) % data.m],
    )
    return data, c1 * c2


def chi_inner_sum(
    d1_spec: CharacterSpec, d2_spec: CharacterSpec, u: FieldElement
) -> ComplexValue:
    """Sum over nonzero alpha of chi(alpha) chi'(alpha+1/alpha) psi_hat(u alpha)."""
    tower = d1_spec.tower
    if not tower.is_in_subfield(u):
        raise ValueError("additive shift must lie in the q-element subfield")
    data, base = _char_vectors(d1_spec, d2_spec)
    if u:
        shift = int(data.exponent[u.code])
        base = base * np.roll(data.psi_top, -shift)
    total = complex(np.sum(base))
    return ComplexValue(total.real, total.imag)


def chi_a_sum(
    d1_spec: CharacterSpec, d2_spec: CharacterSpec, a: FieldElement
) -> ComplexValue:
    """The full mixed sum: inner sums over alpha, modulated over all shifts u."""
    tower = d1_spec.tower
    if not tower.is_in_subfield(a):
        raise ValueError("trace value must lie in the q-element subfield")
    data, base = _char_vectors(d1_spec, d2_spec)
    res, ims = [], []
    for u in tower.subfield_elements():
        if u:
            inner = complex(np.sum(base * np.roll(data.psi_top, -int(data.exponent[u.code]))))
        else:
            inner = complex(np.sum(base))
        term = inner * _unit(tower.subfield_absolute_trace(-(a * u)), tower.p)
        res.append(term.real)
        ims.append(term.imag)
    return ComplexValue(math.fsum(res), math.fsum(ims))


def count_via_characters(
    f1: Factorization,
    f2: Factorization,
    a: FieldElement,
    tolerance: float = COUNT_TOL,
) -> int:
    """Reproduce the per-trace count purely from character sums.

    Expands the product of the two freeness indicators and the trace
    indicator, sums the resulting mixed character sums with Mobius/totient
    weights, and rounds.  A residue above tolerance means a bug, not data:
    the identity is exact in exact arithmetic.
    """
    tower = a.tower
    m_top = tower.order - 1
    for f in (f1, f2):
        if m_top % f.value:
            raise ValueError(f"{f.value} does not divide {m_top}")
    if not tower.is_in_subfield(a):
        raise ValueError("trace value must lie in the q-element subfield")
    res, ims = [], []
    for r1 in range(len(f1.primes) + 1):
        for s1 in combinations(f1.primes, r1):
            d1 = math.prod(s1)
            w1 = (-1) ** r1 / math.prod(ell - 1 for ell in s1)
            for j1 in _exact_character_indices(m_top, d1):
                spec1 = CharacterSpec.multiplicative(tower, j1)
                for r2 in range(len(f2.primes) + 1):
                    for s2 in combinations(f2.primes, r2):
                        d2 = math.prod(s2)
                        w2 = (-1) ** r2 / math.prod(ell - 1 for ell in s2)
                        for j2 in _exact_character_indices(m_top, d2):
                            spec2 = CharacterSpec.multiplicative(tower, j2)
                            chi = chi_a_sum(spec1, spec2, a)
                            res.append(w1 * w2 * chi.re)
                            ims.append(w1 * w2 * chi.im)
    scale = float(theta(f1) * theta(f2) / tower.q)
    real = scale * math.fsum(res)
    imag = scale * math.fsum(ims)
    if abs(imag) > tolerance:
        raise ArithmeticError(f"imaginary residue {imag} exceeds {tolerance}")
    rounded = round(real)
    if abs(real - rounded) > tolerance:
        raise ArithmeticError(f"rounding residue {real - rounded} exceeds {tolerance}")
    return int(rounded)


def audit_field(q: int, n: int, work_cap: int = AUDIT_WORK_CAP) -> dict:
    """Dense empirical battery over every character pair of one small field.

    Checks, to rounding error: orthogonality of the character table, the
    two indicator identities against direct field arithmetic, agreement of
    the character-sum count with enumeration (fields up to 81 elements),
    the adjusted fiber identity at trivial divisors, and the size bounds
    on all mixed sums with a nontrivial character pair.  Cost and memory
    grow as q*(q^n-1)^2, capped by work_cap.
    """
    tower = FieldTower.get(q, n)
    m = tower.order - 1
    if q * m * m > work_cap:
        raise ValueError(
            f"audit work q*(q^n-1)^2 = {q * m * m} exceeds cap {work_cap}"
        )
    data = _field_data(tower)
    subs = tower.subfield_elements()
    i = np.arange(m, dtype=np.int64)

    # orthogonality of the full character table, both directions
    column_sums = m * np.fft.ifft(np.ones(m))
    ortho_residue = float(np.abs(column_sums[1:]).max()) if m > 1 else 0.0

    # freeness indicator vs direct arithmetic, all divisors, all alpha != 0
    rho_residue = 0.0
    g = tower.generator
    nonzero = []
    alpha = tower.one
    for _ in range(m):
        nonzero.append(alpha)
        alpha = alpha * g
    for d in divisors(tower.order_factorization):
        f_d = _divisor_factorization(tower.order_factorization, d)
        for alpha in nonzero:
            truth = 1.0 if tower.is_e_free(alpha, d) else 0.0
            rho_residue = max(
                rho_residue, abs(complex(rho_indicator(alpha, f_d)) - truth)
            )

    # trace indicator vs direct trace, all alpha including zero
    tau_residue = 0.0
    for alpha in [tower.zero] + nonzero:
        tr = tower.trace(alpha)
        for a in subs:
            truth = 1.0 if tr == a else 0.0
            tau_residue = max(
                tau_residue, abs(complex(tau_indicator(alpha, a)) - truth)
            )

    # inner sums for every character pair and shift: [u, j1, j2]
    clamped = np.where(data.beta_dlog < 0, 0, data.beta_dlog)
    c2_table = np.where(
        data.beta_dlog[None, :] < 0,
        0.0,
        data.roots[(np.outer(i, clamped)) % m],
    )
    inner = np.empty((q, m, m), dtype=complex)
    for u_idx, u in enumerate(subs):
        if u:
            row = np.roll(data.psi_top, -int(data.exponent[u.code]))
        else:
            row = np.ones(m)
        inner[u_idx] = (m * np.fft.ifft(c2_table * row[None, :], axis=1)).T

    inner_bound = cq(q) * q ** (n / 2)
    inner_mags = np.abs(inner)
    inner_mags[:, 0, 0] = 0.0
    inner_max = float(inner_mags.max())

    # modulate by subfield characters to get the full mixed sums per trace
    psi_sub = np.empty((q, q), dtype=complex)
    for a_idx, a in enumerate(subs):
        for u_idx, u in enumerate(subs):
            psi_sub[a_idx, u_idx] = _unit(
                tower.subfield_absolute_trace(-(a * u)), tower.p
            )
    chi = np.einsum("au,ujk->ajk", psi_sub, inner)
    chi_mags = np.abs(chi)
    value_cap_ok = bool(chi_mags.max() <= tower.order + 1 + 1e-6)
    chi_mags[:, 0, 0] = 0.0
    outer_bound = cq(q) * q ** (n / 2 + 1)
    outer_max = float(chi_mags.max())

    # counting identity against enumeration, and the fiber identity
    count_ok = None
    pairs_checked = 0
    if tower.order <= 81:
        count_ok = True
        f_top = tower.order_factorization
        square_free = [
            _divisor_factorization(f_top, d)
            for d in squarefree_divisors(f_top)
        ]
        for fa in square_free:
            for fb in square_free:
                for a in subs:
                    pairs_checked += 1
                    if count_via_characters(fa, fb, a) != count_na(
                        tower, fa, fb, a
                    ):
                        count_ok = False
    degenerate = np.bincount(
        data.trace_class[data.beta_dlog < 0], minlength=q
    )
    fiber_ok = True
    one = _divisor_factorization(tower.order_factorization, 1)
    for a_idx, a in enumerate(subs):
        expected = q ** (n - 1) - (1 if a_idx == 0 else 0) - int(degenerate[a_idx])
        if count_via_characters(one, one, a) != expected:
            fiber_ok = False

    tol = INDICATOR_TOL
    return {
        "q": q,
        "n": n,
        "order": tower.order,
        "cq": cq(q),
        "orthogonality_residue": ortho_residue,
        "orthogonality_ok": ortho_residue <= tol,
        "rho_max_residue": rho_residue,
        "rho_ok": rho_residue <= tol,
        "tau_max_residue": tau_residue,
        "tau_ok": tau_residue <= tol,
        "inner_bound": float(inner_bound),
        "inner_max": inner_max,
        "inner_ok": inner_max <= inner_bound + 1e-6,
        "outer_bound": float(outer_bound),
        "outer_max": outer_max,
        "outer_ok": outer_max <= outer_bound + 1e-6,
        "value_cap_ok": value_cap_ok,
        "count_ok": count_ok,
        "count_pairs_checked": pairs_checked,
        "fiber_ok": fiber_ok,
    }


def _divisor_factorization(f: Factorization, d: int) -> Factorization:
    """Factorization of a divisor d of f.value, reusing f's primes."""
    if d == 1:
        return Factorization(value=1, factors=())
    factors = []
    rest = d
    for ell, _ in f.factors:
        e = 0
        while rest % ell == 0:
            rest //= ell
            e += 1
        if e:
            factors.append((ell, e))
    if rest != 1:
        raise ValueError(f"{d} does not divide {f.value}")
    return Factorization(value=d, factors=tuple(factors))
