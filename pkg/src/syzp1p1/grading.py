"""Degrees, monomial bases, S2 x S2 symmetry and Koszul duality bookkeeping.

Monomials of S_D are recorded by their x0 and y0 exponents ``(i, j)``; the
x1 and y1 exponents are ``d1 - i`` and ``d2 - j``.  A multidegree is the
Z^4-degree ``(a0, a1, a2, a3)`` of x0, x1, y0, y1 exponent totals.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import UsageError

DEFAULT_MODULUS = 32003

Bidegree = tuple[int, int]
Multidegree = tuple[int, int, int, int]


class Monomial(NamedTuple):
    i: int
    j: int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True)
class EmbeddingSpec:
    """The pair (D; b) together with the prime used for field arithmetic."""

    d1: int
    d2: int
    b1: int
    b2: int
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise UsageError(f"D must be positive, got ({self.d1},{self.d2})")
        if self.modulus == 2 or not is_prime(self.modulus):
            raise UsageError(f"modulus must be an odd prime, got {self.modulus}")

    @property
    def D(self) -> Bidegree:
        return (self.d1, self.d2)

    @property
    def b(self) -> Bidegree:
        return (self.b1, self.b2)

    @property
    def N(self) -> int:
        return (self.d1 + 1) * (self.d2 + 1)

    @property
    def codim(self) -> int:
        return self.N - 3

    def with_modulus(self, modulus: int) -> "EmbeddingSpec":
        return EmbeddingSpec(self.d1, self.d2, self.b1, self.b2, modulus)

    def label(self) -> str:
        return f"({self.b1},{self.b2});({self.d1},{self.d2})"

    def key(self) -> dict:
        """Combinatorial identity of the spec (the modulus is deliberately absent)."""
        return {"d1": self.d1, "d2": self.d2, "b1": self.b1, "b2": self.b2}

    def spec_hash(self, extra=None) -> str:
        payload = {"spec": self.key()}
        if extra is not None:
            payload["extra"] = extra
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def h0(e: Bidegree) -> int:
    """Dimension of S_e, the bidegree-e forms on P1 x P1."""
    if e[0] < 0 or e[1] < 0:
        return 0
    return (e[0] + 1) * (e[1] + 1)


@lru_cache(maxsize=None)
def _basis(d1: int, d2: int) -> tuple[Monomial, ...]:
    return tuple(Monomial(i, j) for i in range(d1, -1, -1) for j in range(d2, -1, -1))


def monomial_basis(D: Bidegree) -> list[Monomial]:
    """Monomials of S_D in descending lexicographic order of (i, j)."""
    if D[0] < 0 or D[1] < 0:
        return []
    return list(_basis(D[0], D[1]))


def monomial_multidegree(m: Monomial, D: Bidegree) -> Multidegree:
    return (m.i, D[0] - m.i, m.j, D[1] - m.j)


def canonical_multidegree(a) -> tuple[Multidegree, tuple[bool, bool]]:
    """Representative with a0 >= a1 and a2 >= a3, plus the (x-swap, y-swap) flags."""
    a0, a1, a2, a3 = a
    xs = a1 > a0
    ys = a3 > a2
    if xs:
        a0, a1 = a1, a0
    if ys:
        a2, a3 = a3, a2
    return (a0, a1, a2, a3), (xs, ys)


def orbit(a) -> list[Multidegree]:
    """Distinct images of ``a`` under the two coordinate-pair swaps."""
    a0, a1, a2, a3 = a
    out = []
    for x in ((a0, a1), (a1, a0)):
        for y in ((a2, a3), (a3, a2)):
            m = (x[0], x[1], y[0], y[1])
            if m not in out:
                out.append(m)
    return out


def strand_bidegree(spec: EmbeddingSpec, p: int, q: int) -> Bidegree:
    n = p + q
    return (n * spec.d1 + spec.b1, n * spec.d2 + spec.b2)


def strand_index(spec: EmbeddingSpec, a) -> int | None:
    """The n with |a| on the bidegree nD + b, or None if a lies on no strand."""
    ex = a[0] + a[1] - spec.b1
    ey = a[2] + a[3] - spec.b2
    if ex % spec.d1 or ey % spec.d2:
        return None
    n = ex // spec.d1
    if ey // spec.d2 != n:
        return None
    return n


def alpha_vector(spec: EmbeddingSpec) -> Multidegree | None:
    """Weight-duality vector, or None when its halves are not integral."""
    nx = spec.N * spec.d1 - 2
    ny = spec.N * spec.d2 - 2
    if nx % 2 or ny % 2:
        return None
    return (nx // 2, nx // 2, ny // 2, ny // 2)


@dataclass(frozen=True)
class DualMap:
    spec: EmbeddingSpec
    dual_spec: EmbeddingSpec
    alpha: Multidegree | None

    def index_map(self, p: int, q: int) -> tuple[int, int]:
        return (self.spec.codim - p, 2 - q)

    def weight(self, a) -> Multidegree:
        """The w' with a + (w')^opp = alpha."""
        if self.alpha is None:
            raise UsageError("weight duality unavailable: alpha is not integral")
        al = self.alpha
        return (al[1] - a[1], al[0] - a[0], al[3] - a[3], al[2] - a[2])


def koszul_dual_spec(spec: EmbeddingSpec) -> DualMap:
    dual = EmbeddingSpec(spec.d1, spec.d2, spec.d1 - spec.b1 - 2, spec.d2 - spec.b2 - 2, spec.modulus)
    return DualMap(spec, dual, alpha_vector(spec))
