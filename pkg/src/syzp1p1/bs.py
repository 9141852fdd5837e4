"""Pure diagrams, exact Boij-Soederberg decomposition and coefficient formulas.

Tables are handled as column lists: ``cols[i]`` maps the internal degree j to
beta_{i,j}.  All arithmetic uses ``fractions.Fraction``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod

from .errors import IntegrityError, UsageError


def _check_delta(delta) -> tuple:
    delta = tuple(int(x) for x in delta)
    if any(b <= a for a, b in zip(delta, delta[1:])):
        raise UsageError(f"degree sequence {delta} is not strictly increasing")
    return delta


def pure_diagram(delta) -> list:
    """Entries pi_delta(i, delta_i) = prod_{k != i} 1/|delta_i - delta_k|, indexed by i."""
    delta = _check_delta(delta)
    return [
        Fraction(1, prod(abs(d - e) for k, e in enumerate(delta) if k != i))
        for i, d in enumerate(delta)
    ]


@dataclass
class BSDecomposition:
    terms: list  # [(delta tuple, Fraction)]

    def to_json(self) -> str:
        items = [
            {"delta": list(d), "a_num": str(c.numerator), "a_den": str(c.denominator)}
            for d, c in self.terms
        ]
        return json.dumps({"terms": items}, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "BSDecomposition":
        doc = json.loads(text)
        return cls([(tuple(t["delta"]), Fraction(int(t["a_num"]), int(t["a_den"]))) for t in doc["terms"]])

    def reconstruct(self, ncols: int) -> list:
        cols = [dict() for _ in range(ncols)]
        for delta, c in self.terms:
            for i, v in enumerate(pure_diagram(delta)):
                cols[i][delta[i]] = cols[i].get(delta[i], 0) + c * v
        return [{j: v for j, v in col.items() if v} for col in cols]


def columns_from_graded(table) -> list:
    """Column form of a GradedBettiTable: cols[p][p+q] = dim K_{p,q}, p = 0..codim."""
    cols = [dict() for _ in range(table.spec.codim + 1)]
    for (p, q), v in table.nonzero().items():
        if p >= len(cols):
            raise UsageError(f"entry K_{{{p},{q}}} beyond the codimension")
        cols[p][p + q] = Fraction(v)
    return cols


def columns_from_rows(rows: dict, ncols: int) -> list:
    cols = [dict() for _ in range(ncols)]
    for q, vals in rows.items():
        for p, v in enumerate(vals):
            if v:
                cols[p][p + q] = Fraction(v)
    return cols


def bs_decompose(cols: list) -> BSDecomposition:
    """Greedy decomposition: subtract the largest multiple of the top pure diagram until zero."""
    cur = [{j: Fraction(v) for j, v in col.items() if v} for col in cols]
    if any(v < 0 for col in cur for v in col.values()):
        raise IntegrityError("Betti table has negative entries")
    terms = []
    limit = len(cur) * 3 + 1
    while any(cur):
        if len(terms) >= limit:
            raise IntegrityError("not a BS-decomposable table: no termination")
        if not all(cur):
            raise IntegrityError("not a BS-decomposable table: an inner column emptied before the table")
        delta = tuple(min(col) for col in cur)
        if any(b <= a for a, b in zip(delta, delta[1:])):
            raise IntegrityError(f"not a BS-decomposable table: top degrees {delta} do not increase")
        pi = pure_diagram(delta)
        c = min(cur[i][delta[i]] / pi[i] for i in range(len(cur)))
        for i in range(len(cur)):
            v = cur[i][delta[i]] - c * pi[i]
            if v:
                cur[i][delta[i]] = v
            else:
                del cur[i][delta[i]]
        terms.append((delta, c))
    return BSDecomposition(terms)


def rising(x: int, n: int) -> int:
    """prod_{k<n} (x + k), the product as printed with plus signs."""
    return prod(x + k for k in range(n))


def falling(x: int, n: int) -> int:
    return prod(x - k for k in range(n))


def normalize_coefficients(dec: BSDecomposition, spec) -> dict:
    """b_delta = a_delta / N! and the multiplicity-sum comparison under both factorial readings."""
    N = spec.N
    nf = factorial(N)
    b = [c / nf for _, c in dec.terms]
    total = sum(b, Fraction(0))
    num = 2 * spec.d1 * spec.d2
    as_printed = Fraction(num, rising(N, 3))
    falling_form = Fraction(num, falling(N, 3))
    return {
        "normalized": b,
        "sum": total,
        "formula_as_printed": as_printed,
        "formula_falling": falling_form,
        "matches_as_printed": total == as_printed,
        "matches_falling": total == falling_form,
    }


# ----------------------------------------------------- conjectured closed forms

def bs_sum_sequences(spec) -> list:
    """For b = 0 and d1 <= d2: [N] minus {1, N - d1 - j} for 0 <= j <= (d1-1)(d2-2)."""
    N = spec.N
    out = []
    for j in range((spec.d1 - 1) * (spec.d2 - 2) + 1):
        hole = N - spec.d1 - j
        out.append(tuple(k for k in range(N) if k not in (1, hole)))
    return out


def two_row_sequences(d2: int, b2: int) -> list:
    """Degree sequences of the D = (2, d2), b = (0, b2) family, j = 0..d2-2."""
    full = range(3 * (d2 + 1))
    out = []
    for j in range(d2 - 1):
        if j <= d2 - b2 - 2:
            holes = (b2 + 1, 3 * d2 + 1 - j)
        else:
            holes = (d2 - j - 1, 2 * d2 + b2 + 3)
        out.append(tuple(k for k in full if k not in holes))
    return out


def two_row_coefficients(d2: int, b2: int) -> list:
    base = 2 * factorial(3 * d2)
    return [base * (d2 + 2) if j == d2 - b2 - 2 else base for j in range(d2 - 1)]


def three_row_coefficient(d2: int, j: int) -> Fraction:
    """(j+1)(4d2+4)! / (4 binom(4d2+4, 4)) for D = (3, d2), b = 0, j <= d2 - 4."""
    return Fraction((j + 1) * factorial(4 * d2 + 4), 4 * comb(4 * d2 + 4, 4))
