from fractions import Fraction

from conftest import spec_of, table_for
from golden import BETTI, SCHUR_1223
from syzp1p1.betti import graded_from_rows
from syzp1p1.bs import bs_decompose, columns_from_rows
from syzp1p1.reports import (
    bs_coeffs_csv,
    row_distribution,
    schur_counts,
    schur_counts_csv,
    unimodal_violation,
    unimodality_checks,
)
from syzp1p1.schur import SchurDecomposition, decompose_table


def graded(key):
    b, D = key
    return graded_from_rows(spec_of(b, D), BETTI[key])


def test_row_profile_22():
    prof = row_distribution(graded(((0, 0), (2, 2))), 1)
    assert prof.values == [20, 64, 90, 64, 20]
    assert prof.normalized == [Fraction(v, 258) for v in prof.values]
    assert sum(prof.normalized) == 1
    assert prof.mean == 3
    assert prof.to_csv().splitlines()[1] == "1,20,10,129"


def test_row_profile_33_and_singletons():
    prof = row_distribution(graded(((0, 0), (3, 3))), 1)
    assert len(prof.values) == 11 and prof.values[-2:] == [780, 22]
    single = row_distribution(graded(((0, 0), (2, 2))), 0)
    assert single.normalized == [1]
    assert row_distribution(graded(((1, 1), (2, 3))), 2).ps == []


def test_unimodal_violation():
    assert unimodal_violation([3, 3, 3]) is None
    assert unimodal_violation([1, 2, 2, 1]) is None
    assert unimodal_violation([1, 3, 2, 4]) == (1, 2, 3)
    assert unimodal_violation([]) is None


def test_unimodality_of_24_rows():
    audits = unimodality_checks(graded(((0, 0), (2, 4))))
    q1 = next(a for a in audits if a["statistic"] == "betti" and a["q"] == 1)
    assert q1["unimodal"] and 7920 in q1["values"]


def test_schur_counts():
    k80 = schur_counts(decompose_table(table_for((2, 2), (3, 3))))[(8, 0)]
    assert k80 == (5, 5, 1)
    decomps = {}
    for (p, q), summands in SCHUR_1223.items():
        d = SchurDecomposition(p, q)
        d.summands.update(summands)
        decomps[(p, q)] = d
    counts = schur_counts(decomps)
    assert counts[(6, 1)][1:] == (19, 3)
    assert all(c[0] <= c[1] and c[2] <= c[1] for c in counts.values())
    assert schur_counts({(1, 1): SchurDecomposition(1, 1)})[(1, 1)] == (0, 0, 0)
    shuffled = dict(reversed(list(decomps.items())))
    assert schur_counts_csv(shuffled) == schur_counts_csv(decomps)


def test_bs_csv():
    spec = spec_of((0, 0), (2, 5))
    dec = bs_decompose(columns_from_rows(BETTI[((0, 0), (2, 5))], 16))
    lines = bs_coeffs_csv(dec, spec).splitlines()
    assert lines[0] == "j,delta,a_num,a_den,normalized"
    assert len(lines) == 5
