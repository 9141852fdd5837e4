from conftest import spec_of, table_for
from golden import BETTI
from syzp1p1.betti import graded_from_rows
from syzp1p1.conjectures import bs_checks, conjecture_suite, schur_entry_checks
from syzp1p1.bs import bs_decompose, columns_from_rows
from syzp1p1.schur import decompose_table


def by_name(items):
    return {it["conjecture"]: it for it in items}


def test_suite_on_22_is_all_statuses_known():
    mt = table_for((0, 0), (2, 2))
    suite = by_name(conjecture_suite(mt.spec, mt.collapse(), decompose_table(mt)))
    assert suite["unimodal-betti-q1"]["status"] == "pass"
    assert suite["unimodal-betti-q1"]["values"] == [20, 64, 90, 64, 20]
    assert all(it["status"] in ("pass", "fail", "not-applicable", "unavailable") for it in suite.values())


def test_two_row_family_on_025():
    spec = spec_of((0, 0), (2, 5))
    dec = bs_decompose(columns_from_rows(BETTI[((0, 0), (2, 5))], 16))
    res = by_name(bs_checks(spec, dec))
    assert res["bs-two-row-family"]["status"] == "pass"
    assert res["bs-all-sequences-nonzero"]["status"] == "pass"


def test_coefficient_sum_reported_under_both_readings():
    for key in [((0, 0), (2, 3)), ((0, 0), (2, 5)), ((0, 0), (3, 3))]:
        spec = spec_of(*key)
        dec = bs_decompose(columns_from_rows(BETTI[key], spec.codim + 1))
        item = by_name(bs_checks(spec, dec))["bs-coefficient-sum"]
        assert item["status"] == "fail"
        assert item["matches_falling"] is True


def test_schur_entries_need_data_and_b_zero():
    spec = spec_of((1, 1), (2, 3))
    assert {it["status"] for it in schur_entry_checks(spec, {})} == {"not-applicable"}
    assert {it["status"] for it in schur_entry_checks(spec_of((0, 0), (2, 3)), None)} == {"unavailable"}


def test_q2_last_entry_on_33():
    mt = table_for((0, 0), (3, 3))
    res = by_name(schur_entry_checks(mt.spec, decompose_table(mt)))
    assert res["q2-last"]["status"] == "pass"
    assert res["q1-last"]["status"] == "not-applicable"


def test_suite_reports_not_decomposable_tables():
    spec = spec_of((0, 0), (2, 2))
    g = graded_from_rows(spec, {0: [1], 1: [0, 0, 5]})
    suite = by_name(conjecture_suite(spec, g))
    assert suite["bs-decomposition"]["status"] == "fail"
