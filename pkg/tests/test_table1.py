"""Reference table reproduction tests."""

from fractions import Fraction

import pytest

from primpair.table1 import (
    delta_matches_reference,
    evaluate_all,
    evaluate_row,
    load_rows,
)


def row(q, n):
    return next(r for r in load_rows() if (r.q, r.n) == (q, n))


def test_fifty_distinct_rows():
    rows = load_rows()
    assert len(rows) == 50
    assert len({(r.q, r.n) for r in rows}) == 50


def test_every_row_recomputes_cleanly():
    for ev in evaluate_all():
        where = (ev.row.q, ev.row.n)
        assert ev.primes_match, where
        assert ev.delta_match, where
        assert ev.passes, where


def test_anchor_rows():
    assert row(2, 28).reference_delta == "0.8510"
    assert row(23, 5).reference_delta == "0.8181"
    assert row(64, 5).reference_delta == "0.4486"
    ev = evaluate_row(row(2, 28))
    assert ev.report.delta_float == "0.851076"
    assert ev.report.l_primes == (3, 5)
    assert ev.report.r == 4


def test_documented_threshold_anomalies():
    # the quoted threshold at (2,28) matches a variant formula; ours differs
    ev = evaluate_row(row(2, 28))
    assert ev.report.threshold == "1.561158"
    assert 0.02 < ev.threshold_deviation < 0.03
    ev = evaluate_row(row(23, 5))
    assert 0.07 < ev.threshold_deviation < 0.08
    # every undisputed row agrees to better than a hundredth
    for ev in evaluate_all():
        if (ev.row.q, ev.row.n) not in ((2, 28), (23, 5), (4, 10)):
            assert ev.threshold_deviation < 0.01, (ev.row.q, ev.row.n)


def test_corrected_rows_carry_notes():
    assert "0.6814" in row(9, 9).note
    assert row(9, 9).reference_delta == "0.6841"
    assert "omega 1" in row(4, 10).note
    assert row(4, 10).omega_l == 1
    assert "n=18" in row(2, 16).note
    assert not any((r.q, r.n) == (2, 18) for r in load_rows())
    assert sum(1 for r in load_rows() if r.note) == 3


def test_delta_matcher_truncation_tolerance():
    # 0.676141... truncates to 6761; quote 0.676 scales to 6760: distance 1
    ev = evaluate_row(row(59, 5))
    assert ev.report.delta_float == "0.676141"
    assert ev.delta_match
    assert delta_matches_reference(Fraction(6761, 10**4), "0.676")
    assert not delta_matches_reference(Fraction(6762, 10**4), "0.676")
    assert delta_matches_reference(Fraction(1, 3), "0.3334")
    with pytest.raises(ValueError):
        delta_matches_reference(Fraction(1, 3), "0.33333")


def test_even_and_odd_constants_present():
    assert {r.q % 2 for r in load_rows()} == {0, 1}
    assert evaluate_row(row(32, 6)).report.cq == 2
    assert evaluate_row(row(169, 5)).report.cq == 3
