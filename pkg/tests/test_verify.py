"""Tests for the exhaustive-count and witness-search engine."""

import math
from fractions import Fraction

import pytest

from primpair.ff import FieldTower
from primpair.numtheory import factorize
from primpair.verify import (
    DEFAULT_WITNESS_BUDGET,
    EXCEPTION_PAIRS,
    IN_P,
    INCONCLUSIVE,
    NOT_IN_P,
    confirm_exceptions,
    count_na,
    count_total,
    lower_bound_check,
    verify_pair,
    witness_search,
)

ONE = factorize(1)

# codes of trace classes ascend; counts frozen from the enumeration engine
# and cross-checked by the pure-python brute force below
PER_TRACE_COUNTS = {
    (2, 3): {0: 3, 1: 3},
    (3, 3): {0: 0, 1: 3, 2: 3},
    (4, 3): {0: 0, 1: 6, 56: 3, 57: 3},
    (5, 3): {0: 0, 1: 3, 2: 9, 3: 9, 4: 3},
    (2, 5): {0: 15, 1: 15},
}


def brute_counts(tower, e1, e2):
    """Direct per-trace tally using only scalar field operations."""
    counts = {a.code: 0 for a in tower.subfield_elements()}
    alpha = tower.one
    for _ in range(tower.order - 1):
        if tower.is_e_free(alpha, e1):
            beta = alpha + alpha.inverse()
            if tower.is_e_free(beta, e2):
                counts[tower.trace(alpha).code] += 1
        alpha = alpha * tower.generator
    return counts


class TestExceptionInventory:
    def test_size_and_membership(self):
        assert len(EXCEPTION_PAIRS) == 47
        assert len(set(EXCEPTION_PAIRS)) == 47
        assert (3, 5) in EXCEPTION_PAIRS
        assert (61, 6) in EXCEPTION_PAIRS
        assert (2, 12) in EXCEPTION_PAIRS
        assert (2, 5) not in EXCEPTION_PAIRS
        assert (2, 13) not in EXCEPTION_PAIRS
        assert (13, 29) not in EXCEPTION_PAIRS

    def test_per_degree_tallies(self):
        by_n = {}
        for _, n in EXCEPTION_PAIRS:
            by_n[n] = by_n.get(n, 0) + 1
        assert by_n == {5: 17, 6: 17, 7: 3, 8: 5, 9: 2, 10: 1, 12: 2}


class TestCounting:
    @pytest.mark.parametrize("q,n", sorted(PER_TRACE_COUNTS))
    def test_frozen_per_trace_counts(self, q, n):
        report = verify_pair(q, n, mode="count")
        got = {c: t.count for c, t in report.per_trace.items()}
        assert got == PER_TRACE_COUNTS[(q, n)]

    @pytest.mark.parametrize("q,n", sorted(PER_TRACE_COUNTS))
    def test_counts_match_scalar_bruteforce(self, q, n):
        tower = FieldTower.get(q, n)
        m = tower.order - 1
        want = brute_counts(tower, m, m)
        report = verify_pair(q, n, mode="count")
        assert {c: t.count for c, t in report.per_trace.items()} == want

    def test_partial_freeness_matches_bruteforce(self):
        tower = FieldTower.get(5, 3)
        for e1 in (1, 2, 31, 62):
            for e2 in (1, 2, 31, 62):
                want = brute_counts(tower, e1, e2)
                got = {
                    a.code: count_na(tower, factorize(e1), factorize(e2), a)
                    for a in tower.subfield_elements()
                }
                assert got == want, (e1, e2)

    def test_trivial_divisor_counts(self):
        t5 = FieldTower.get(5, 3)
        assert [
            count_na(t5, ONE, ONE, a) for a in t5.subfield_elements()
        ] == [24, 24, 25, 25, 24]
        t26 = FieldTower.get(2, 6)
        assert [
            count_na(t26, ONE, ONE, a) for a in t26.subfield_elements()
        ] == [30, 32]
        t35 = FieldTower.get(3, 5)
        assert [
            count_na(t35, ONE, ONE, a) for a in t35.subfield_elements()
        ] == [80, 81, 81]

    def test_one_sided_freeness(self):
        tower = FieldTower.get(2, 5)
        f31 = factorize(31)
        subs = tower.subfield_elements()
        assert [count_na(tower, f31, ONE, a) for a in subs] == [15, 15]
        assert [count_na(tower, ONE, f31, a) for a in subs] == [15, 15]

    def test_total_is_independent_of_trace_split(self):
        for q, n in [(2, 5), (3, 5), (5, 3), (3, 6)]:
            tower = FieldTower.get(q, n)
            f = tower.order_factorization
            total = count_total(tower, f, f)
            report = verify_pair(q, n, mode="count")
            assert total == sum(t.count for t in report.per_trace.values())

    def test_qualifying_orbits_have_full_degree(self):
        # the defining conditions are Frobenius-stable over the subfield,
        # and a qualifying element generates the whole field, so counts
        # come in orbits of size exactly n
        for q, n in [(2, 3), (3, 3), (4, 3), (5, 3), (2, 5), (3, 5),
                     (4, 5), (2, 9), (3, 6)]:
            report = verify_pair(q, n, mode="count")
            for t in report.per_trace.values():
                assert t.count % n == 0, (q, n, t.a_code, t.count)

    def test_fewer_primes_never_decrease_the_count(self):
        tower = FieldTower.get(5, 3)
        full = tower.order_factorization
        a = tower.subfield_elements()[2]
        loose = count_na(tower, ONE, ONE, a)
        mid = count_na(tower, factorize(2), factorize(31), a)
        tight = count_na(tower, full, full, a)
        assert loose >= mid >= tight


class TestVerifyPair:
    def test_count_mode_report_shape(self):
        report = verify_pair(3, 3, mode="count", seed=5)
        assert (report.q, report.n, report.mode) == (3, 3, "count")
        assert report.seed == 5
        assert report.verdict == NOT_IN_P
        assert report.elapsed >= 0.0
        tower = FieldTower.get(3, 3)
        for t in report.per_trace.values():
            assert t.witness is None
            assert t.attempts == 26
            assert isinstance(t.a_coeffs, tuple)
            assert len(t.a_coeffs) == tower.degree

    def test_exception_mode_same_tally_as_count(self):
        a = verify_pair(4, 3, mode="count")
        b = verify_pair(4, 3, mode="exception")
        assert b.mode == "exception"
        assert b.verdict == NOT_IN_P
        assert {c: t.count for c, t in a.per_trace.items()} == {
            c: t.count for c, t in b.per_trace.items()
        }

    def test_witness_mode_agrees_with_count_mode(self):
        for q, n in [(2, 5), (3, 6), (7, 5)]:
            assert verify_pair(q, n, mode="count").verdict == IN_P
            report = verify_pair(q, n, mode="witness")
            assert report.verdict == IN_P
            for t in report.per_trace.values():
                assert t.count is None
                assert t.witness is not None
                assert t.witness.attempts == t.attempts

    def test_witness_mode_cannot_rule_out(self):
        # (3,3) has no qualifying element of trace zero, so the search
        # exhausts its budget; the verdict stays inconclusive
        report = verify_pair(3, 3, mode="witness", budget=2000)
        assert report.verdict == INCONCLUSIVE
        assert report.per_trace[0].witness is None
        assert report.per_trace[0].attempts == 2000
        assert report.per_trace[1].witness.exponent == 17
        assert report.per_trace[1].attempts == 2
        assert report.per_trace[2].witness.exponent == 9
        assert report.per_trace[2].attempts == 7

    def test_budget_exhaustion_is_inconclusive(self):
        report = verify_pair(2, 5, mode="witness", budget=1)
        assert report.verdict == INCONCLUSIVE
        assert all(t.attempts == 1 for t in report.per_trace.values())

    def test_count_beyond_default_scope_agrees_with_witness(self):
        # 16^6 sits just past the default enumeration bound; raising the
        # bound must reach the same conclusion as witness mode
        counted = verify_pair(16, 6, mode="count", enum_bound=17_000_000)
        assert counted.verdict == IN_P
        for t in counted.per_trace.values():
            assert t.count > 0
            assert t.count % 6 == 0  # Frobenius orbits have full length
        witnessed = verify_pair(16, 6, mode="witness")
        assert witnessed.verdict == IN_P

    def test_thread_count_does_not_change_results(self):
        from primpair.verify import _TABLES_CACHE

        base = verify_pair(3, 6, mode="count", threads=1)
        _TABLES_CACHE.clear()
        multi = verify_pair(3, 6, mode="count", threads=8)
        assert {c: t.count for c, t in base.per_trace.items()} == {
            c: t.count for c, t in multi.per_trace.items()
        }
        w1 = verify_pair(3, 5, mode="witness", threads=1)
        w8 = verify_pair(3, 5, mode="witness", threads=8)
        assert {
            c: (t.witness.exponent, t.attempts)
            for c, t in w1.per_trace.items()
        } == {
            c: (t.witness.exponent, t.attempts)
            for c, t in w8.per_trace.items()
        }

    def test_validation(self):
        with pytest.raises(ValueError):
            verify_pair(2, 5, mode="enumerate")
        with pytest.raises(ValueError):
            verify_pair(31, 5, mode="count")
        with pytest.raises(ValueError):
            verify_pair(2, 5, threads=0)
        tower = FieldTower.get(2, 5)
        with pytest.raises(ValueError):
            count_na(tower, factorize(3), factorize(31), tower.zero)
        with pytest.raises(ValueError):
            count_na(tower, factorize(31), factorize(31), tower.generator)
        with pytest.raises(ValueError):
            witness_search(tower, tower.generator)
        with pytest.raises(ValueError):
            count_na(tower, factorize(31), factorize(31), tower.zero,
                     enum_bound=10)


class TestWitnessSearch:
    def test_small_field_witness_is_quick_and_valid(self):
        tower = FieldTower.get(2, 5)
        a = tower.one
        w = witness_search(tower, a, seed=0)
        assert w.attempts <= 10
        assert (w.exponent, w.attempts) == (18, 5)
        assert w.element.coeffs == (1, 1, 0, 0, 1)
        assert tower.generator**w.exponent == w.element
        assert tower.is_primitive(w.element)
        assert tower.is_primitive(w.element + w.element.inverse())
        assert tower.trace(w.element) == a

    def test_seed_changes_the_search_path(self):
        tower = FieldTower.get(2, 5)
        w0 = witness_search(tower, tower.one, seed=0)
        w1 = witness_search(tower, tower.one, seed=1)
        assert (w0.exponent, w0.attempts) == (18, 5)
        assert (w1.exponent, w1.attempts) == (25, 2)

    def test_same_seed_reproduces(self):
        tower = FieldTower.get(3, 5)
        for a in tower.subfield_elements():
            w1 = witness_search(tower, a, seed=42)
            w2 = witness_search(tower, a, seed=42)
            assert (w1.exponent, w1.attempts) == (w2.exponent, w2.attempts)

    def test_every_witness_revalidates(self):
        for q, n in [(3, 5), (4, 5), (7, 3)]:
            tower = FieldTower.get(q, n)
            for a in tower.subfield_elements():
                w = witness_search(tower, a, seed=0)
                if w is None:
                    continue
                assert math.gcd(w.exponent, tower.order - 1) == 1
                assert tower.trace(w.element) == a
                beta = w.element + w.element.inverse()
                assert tower.is_primitive(beta)


class TestLowerBound:
    def test_full_radical_bound_holds(self):
        tower = FieldTower.get(5, 3)
        f = tower.order_factorization
        for a in tower.subfield_elements():
            count, bound, ok = lower_bound_check(tower, f, f, a)
            assert ok
            assert count >= bound

    def test_trivial_divisor_corner_fails_for_some_traces(self):
        # with both divisors trivial the additive term vanishes and the
        # bound reads count >= (q^n - 1)/q exactly; traces whose fibers
        # lose a degenerate element fall below it
        tower = FieldTower.get(5, 3)
        outcomes = {}
        for a in tower.subfield_elements():
            count, bound, ok = lower_bound_check(tower, ONE, ONE, a)
            assert bound == Fraction(124, 5)
            outcomes[a.code] = (count, ok)
        assert outcomes == {
            0: (24, False),
            1: (24, False),
            2: (25, True),
            3: (25, True),
            4: (24, False),
        }

    def test_even_degree_bound_is_exact_rational(self):
        tower = FieldTower.get(2, 6)
        f = tower.order_factorization
        for a in tower.subfield_elements():
            count, bound, ok = lower_bound_check(tower, f, f, a)
            assert bound == Fraction(-3336, 49)
            assert count == 6
            assert ok

    def test_odd_degree_decision_matches_high_precision_oracle(self):
        # the ok flag is decided by squaring out the irrational q^(n+2)/2;
        # recompute the bound with 60-digit reals and compare decisions
        import mpmath

        from primpair.numtheory import squarefree_divisor_count, theta

        tower = FieldTower.get(5, 3)
        for e1 in (1, 2, 31, 62):
            for e2 in (1, 2, 31, 62):
                f1, f2 = factorize(e1), factorize(e2)
                for a in tower.subfield_elements():
                    count, bound, ok = lower_bound_check(tower, f1, f2, a)
                    assert isinstance(bound, Fraction)
                    scale = theta(f1) * theta(f2) / Fraction(5)
                    excess = 3 * (
                        squarefree_divisor_count(f1)
                        * squarefree_divisor_count(f2)
                        - 1
                    )
                    with mpmath.workdps(60):
                        exact = mpmath.mpf(
                            scale.numerator
                        ) / scale.denominator * (
                            124 - excess * mpmath.sqrt(5**5)
                        )
                        assert ok == (count >= exact)
                        assert abs(float(bound) - float(exact)) < 1e-4


class TestConfirmExceptions:
    def test_summary_shape_on_subset(self, monkeypatch):
        import primpair.verify as verify_mod

        monkeypatch.setattr(
            verify_mod, "EXCEPTION_PAIRS", ((3, 5), (4, 5), (31, 5))
        )
        summary = verify_mod.confirm_exceptions(scope=10**4)
        assert summary["scope"] == 10**4
        assert summary["all_confirmed"] is True
        modes = {(r["q"], r["n"]): r["mode"] for r in summary["pairs"]}
        assert modes == {
            (3, 5): "count",
            (4, 5): "count",
            (31, 5): "witness",
        }
        for row in summary["pairs"]:
            assert row["verdict"] == IN_P
            if row["mode"] == "count":
                assert row["min_count"] > 0
            else:
                assert row["min_count"] is None
                assert 1 <= row["max_attempts"] <= DEFAULT_WITNESS_BUDGET
