from itertools import combinations

import pytest

from conftest import spec_of
from syzp1p1.errors import IntegrityError
from syzp1p1.grading import monomial_basis, monomial_multidegree
from syzp1p1.hilbert import euler_characteristic, forced_betti, numerator_coefficient, strand_dimension
from syzp1p1.strands import canonical_strands


def brute_dimension(spec, p, q, a):
    """Count (p-subset of S_D monomials) x (monomial of S_{qD+b}) with total multidegree a."""
    D = spec.D
    gens = [monomial_multidegree(m, D) for m in monomial_basis(D)]
    E = (q * spec.d1 + spec.b1, q * spec.d2 + spec.b2)
    coeff = [monomial_multidegree(m, E) for m in monomial_basis(E)]
    n = 0
    for W in combinations(gens, p):
        s = [sum(w[i] for w in W) for i in range(4)]
        n += sum(1 for c in coeff if all(s[i] + c[i] == a[i] for i in range(4)))
    return n


def test_quadric_values(quadric):
    assert strand_dimension(quadric, 1, 1, (1, 1, 1, 1)) == 4
    assert strand_dimension(quadric, 0, 0, (0, 0, 0, 0)) == 1
    assert numerator_coefficient(quadric, (0, 0, 0, 0)) == 1
    assert numerator_coefficient(quadric, (1, 1, 1, 1)) == -1


@pytest.mark.parametrize("b,D", [((0, 0), (1, 1)), ((0, 0), (2, 2)), ((1, 0), (1, 2)), ((1, 1), (2, 3))])
def test_strand_dimension_matches_enumeration(b, D):
    spec = spec_of(b, D)
    for n in range(0, 5):
        for a in canonical_strands(spec, n):
            for q in (0, 1, 2):
                p = n - q
                if 0 <= p <= 5:
                    assert strand_dimension(spec, p, q, a) == brute_dimension(spec, p, q, a), (p, q, a)


def test_strand_dimension_orbit_invariant():
    spec = spec_of((1, 0), (2, 3))
    for a in [(5, 3, 6, 9), (3, 5, 9, 6), (5, 3, 9, 6)]:
        assert strand_dimension(spec, 3, 0, a) == strand_dimension(spec, 3, 0, (5, 3, 9, 6))


@pytest.mark.parametrize("b,D", [((0, 0), (2, 2)), ((1, 1), (2, 3)), ((0, 1), (3, 2))])
def test_numerator_equals_euler_characteristic(b, D):
    spec = spec_of(b, D)
    for n in range(0, spec.N + 2):
        for a in canonical_strands(spec, n):
            assert numerator_coefficient(spec, a) == euler_characteristic(spec, a)
            x = (a[1], a[0], a[3], a[2])
            assert numerator_coefficient(spec, x) == numerator_coefficient(spec, a)


def test_forced_betti_contract(quadric):
    a = (1, 1, 1, 1)
    assert forced_betti(quadric, a, set(), known={1: 1}) == {}
    assert forced_betti(quadric, a, {1}) == {1: 1}
    assert forced_betti(quadric, a, {1, 2}) is None
    with pytest.raises(IntegrityError):
        forced_betti(quadric, a, {2})
