from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from conftest import spec_of
from golden import BETTI, BS_DELTAS_0025, BS_FACTORS_0025
from syzp1p1.bs import (
    BSDecomposition,
    bs_decompose,
    columns_from_rows,
    falling,
    normalize_coefficients,
    pure_diagram,
    rising,
)
from syzp1p1.errors import IntegrityError, UsageError


def test_pure_diagrams():
    assert pure_diagram((0, 1, 3, 4)) == [Fraction(1, 12), Fraction(1, 6), Fraction(1, 6), Fraction(1, 12)]
    assert pure_diagram((0, 1)) == [1, 1]
    assert pure_diagram((0, 2)) == [Fraction(1, 2), Fraction(1, 2)]
    with pytest.raises(UsageError):
        pure_diagram((0, 2, 2))


def test_consecutive_sequence_is_binomial():
    for r in range(1, 9):
        pi = pure_diagram(tuple(range(r + 1)))
        assert [x * factorial(r) for x in pi] == [Fraction(factorial(r), factorial(i) * factorial(r - i)) for i in range(r + 1)]


def scaled_columns(delta, c):
    return [{d: c * v} for d, v in zip(delta, pure_diagram(delta))]


def test_single_pure_diagram_property():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 18))
        delta = tuple(int(x) for x in np.cumsum(rng.integers(1, 4, size=n)) - 1)
        c = int(rng.integers(1, 10**6 + 1))
        dec = bs_decompose(scaled_columns(delta, c))
        assert dec.terms == [(delta, Fraction(c))]


def reconstructs(dec, cols):
    return dec.reconstruct(len(cols)) == [{j: v for j, v in col.items() if v} for col in cols]


def test_decomposition_of_025():
    cols = columns_from_rows(BETTI[((0, 0), (2, 5))], spec_of((0, 0), (2, 5)).codim + 1)
    dec = bs_decompose(cols)
    f15 = factorial(15)
    assert [list(d) for d, _ in dec.terms] == BS_DELTAS_0025
    assert [c for _, c in dec.terms] == [k * f15 for k in BS_FACTORS_0025]
    assert reconstructs(dec, cols)


@pytest.mark.parametrize("key", sorted(BETTI))
def test_reconstruction_on_every_golden_table(key):
    b, D = key
    cols = columns_from_rows(BETTI[key], spec_of(b, D).codim + 1)
    dec = bs_decompose(cols)
    assert reconstructs(dec, cols)
    assert all(c > 0 for _, c in dec.terms)
    deltas = [d for d, _ in dec.terms]
    assert all(all(x <= y for x, y in zip(s, t)) and s != t for s, t in zip(deltas, deltas[1:]))


def test_two_term_decomposition_of_023():
    cols = columns_from_rows(BETTI[((0, 0), (2, 3))], 10)
    dec = bs_decompose(cols)
    assert len(dec.terms) == 2
    assert reconstructs(dec, cols)


def test_linearity():
    cols = columns_from_rows(BETTI[((0, 0), (2, 4))], 13)
    base = bs_decompose(cols)
    scaled = bs_decompose([{j: 7 * v for j, v in col.items()} for col in cols])
    assert [(d, 7 * c) for d, c in base.terms] == scaled.terms


def test_non_decomposable_input():
    with pytest.raises(IntegrityError):
        bs_decompose([{0: Fraction(1)}, {}, {2: Fraction(1)}])
    with pytest.raises(IntegrityError):
        bs_decompose([{0: Fraction(-1)}])


def test_json_round_trip():
    dec = bs_decompose(columns_from_rows(BETTI[((0, 0), (2, 5))], 16))
    assert BSDecomposition.from_json(dec.to_json()).terms == dec.terms


def test_factorials_and_normalized_sum():
    assert rising(5, 3) == 5 * 6 * 7
    assert falling(5, 3) == 5 * 4 * 3
    spec = spec_of((0, 0), (2, 5))
    n = normalize_coefficients(bs_decompose(columns_from_rows(BETTI[((0, 0), (2, 5))], 16)), spec)
    assert n["sum"] == sum(n["normalized"])
    assert n["formula_as_printed"] == Fraction(2 * 2 * 5, 18 * 19 * 20)
    assert n["formula_falling"] == Fraction(2 * 2 * 5, 18 * 17 * 16)
