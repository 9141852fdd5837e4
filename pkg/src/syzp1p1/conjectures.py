"""Evaluate conjectured statements against computed tables and decompositions.

Every formula is evaluated as stated and compared with the data; a mismatch is
reported, never repaired.  Statuses: pass, fail, not-applicable, unavailable.
"""

from __future__ import annotations

from collections import Counter
from math import comb

from .bs import (
    bs_decompose,
    bs_sum_sequences,
    columns_from_graded,
    normalize_coefficients,
    three_row_coefficient,
    two_row_coefficients,
    two_row_sequences,
)
from .errors import IntegrityError
from .reports import unimodality_checks
from .schur import is_bipartition


def _item(name, status, **detail):
    return {"conjecture": name, "status": status, **detail}


def _summands(decomps, p, q):
    d = decomps.get((p, q))
    return Counter() if d is None else d.summands


def _compare(name, decomps, p, q, expected: list):
    """Compare K_{p,q} against the multiset ``expected`` of weights."""
    if any(not is_bipartition(w) for w in expected):
        return _item(name, "fail", p=p, q=q, reason="formula yields a non-bipartition",
                     expected=[list(w) for w in expected])
    got = _summands(decomps, p, q)
    want = Counter(tuple(w) for w in expected)
    return _item(
        name,
        "pass" if got == want else "fail",
        p=p,
        q=q,
        expected=[list(w) for w in sorted(want)],
        observed=[[*bp, m] for bp, m in sorted(got.items())],
    )


def _add(w, v):
    return tuple(x + y for x, y in zip(w, v))


def schur_entry_checks(spec, decomps) -> list:
    """Last and second-to-last entries of rows q = 1, 2 for b = 0."""
    d1, d2 = spec.d1, spec.d2
    out = []
    if spec.b != (0, 0) or decomps is None:
        why = "b != 0" if spec.b != (0, 0) else "no Schur data"
        status = "not-applicable" if spec.b != (0, 0) else "unavailable"
        return [_item(n, status, reason=why) for n in ("q1-last", "q1-second-last", "q2-last", "q2-second-last")]
    p = (d1 + 1) * (d2 - 1) + d1
    a = (comb(d1 + 1, 2) * d2, comb(d1 + 1, 2) * d2, (d1 + 1) * comb(d2 + 1, 2) - 1, (d1 + 1) * comb(d2, 2) + 1)
    if d2 > d1:
        out.append(_compare("q1-last", decomps, p, 1, [_add(a, (0, 0, -1, 1))]))
    else:
        out.append(_item("q1-last", "not-applicable", reason="needs d2 > d1"))
    if d2 > d1 + 1:
        exp = [_add(a, (0, -d1, -2 - i, -d2 + 2 + i)) for i in range(d2)]
        out.append(_compare("q1-second-last", decomps, p - 1, 1, exp))
    else:
        out.append(_item("q1-second-last", "not-applicable", reason="needs d2 > d1 + 1"))
    p2 = spec.codim
    a2 = (
        comb(d1 + 1, 2) * (d2 + 1) - 1,
        comb(d1 + 1, 2) * (d2 + 1) - d1 + 1,
        (d1 + 1) * comb(d2 + 1, 2) - 1,
        (d1 + 1) * comb(d2 + 1, 2) - d2 + 1,
    )
    out.append(_compare("q2-last", decomps, p2, 2, [a2]))
    if d1 == 2:
        d = d2
        c = (3 * d * d + 3 * d - 2) // 2
        base = (3 * d + 2, 3 * d, c - 1, c - 2 * (d2 - d1) - 3)
        out.append(_compare("q2-second-last", decomps, p2 - 1, 2, [_add(base, (0, 0, -i, i)) for i in range(d - 2)]))
    elif d1 == 3:
        d = d2
        wa = (6 * d + 5, 6 * d + 1, 2 * d * d + 2 * d - 2, 2 * d * d + 2 * d - 2 * d + 3)
        wb = (6 * d + 4, 6 * d + 2, 2 * d * d + 2 * d - 2, 2 * d * d + 2 * d - 2 * d + 1)
        exp = [_add(wa, (0, 0, -i, i)) for i in range(d - 2)] + [_add(wb, (0, 0, -j, j)) for j in range(d2 - 1)]
        out.append(_compare("q2-second-last", decomps, p2 - 1, 2, exp))
    else:
        out.append(_item("q2-second-last", "not-applicable", reason="stated for d1 in {2, 3}"))
    return out


def bs_checks(spec, dec) -> list:
    out = []
    terms = {tuple(d): c for d, c in dec.terms}
    if spec.b == (0, 0) and spec.d1 <= spec.d2:
        seqs = bs_sum_sequences(spec)
        present = [s for s in seqs if terms.get(s, 0) != 0]
        out.append(_item(
            "bs-all-sequences-nonzero",
            "pass" if len(present) == len(seqs) and set(terms) <= set(seqs) else "fail",
            expected_count=len(seqs),
            nonzero=len(present),
            extra=[list(s) for s in terms if s not in seqs],
        ))
    else:
        out.append(_item("bs-all-sequences-nonzero", "not-applicable", reason="needs b = 0 and d1 <= d2"))
    if spec.d1 == 2 and spec.b1 == 0 and 0 <= spec.b2 <= spec.d2 - 2 and spec.d2 >= 3:
        seqs = two_row_sequences(spec.d2, spec.b2)
        coeffs = two_row_coefficients(spec.d2, spec.b2)
        ok = set(terms) == set(seqs) and all(terms.get(s) == c for s, c in zip(seqs, coeffs))
        out.append(_item(
            "bs-two-row-family",
            "pass" if ok else "fail",
            expected=[[list(s), str(c)] for s, c in zip(seqs, coeffs)],
            observed=[[list(s), str(c)] for s, c in dec.terms],
        ))
    else:
        out.append(_item("bs-two-row-family", "not-applicable", reason="needs D = (2, d2 >= 3), b = (0, b2)"))
    if spec.d1 == 3 and spec.b == (0, 0) and spec.d2 >= 4:
        seqs = bs_sum_sequences(spec)
        rows = []
        ok = True
        for j in range(spec.d2 - 3):
            want = three_row_coefficient(spec.d2, j)
            got = terms.get(seqs[j]) if j < len(seqs) else None
            ok = ok and got == want
            rows.append([j, str(want), None if got is None else str(got)])
        out.append(_item("bs-three-row-initial", "pass" if ok else "fail", values=rows))
    else:
        out.append(_item("bs-three-row-initial", "not-applicable", reason="needs D = (3, d2 >= 4), b = 0"))
    if spec.b == (0, 0):
        n = normalize_coefficients(dec, spec)
        out.append(_item(
            "bs-coefficient-sum",
            "pass" if n["matches_as_printed"] else "fail",
            computed=str(n["sum"]),
            formula_as_printed=str(n["formula_as_printed"]),
            formula_falling=str(n["formula_falling"]),
            matches_falling=n["matches_falling"],
        ))
    else:
        out.append(_item("bs-coefficient-sum", "not-applicable", reason="multiplicity formula stated for b = 0"))
    return out


def conjecture_suite(spec, graded, decomps=None, dec=None) -> list:
    """Per-conjecture status with witnessing data."""
    out = []
    for audit in unimodality_checks(graded, decomps):
        name = f"unimodal-{audit['statistic']}-q{audit['q']}"
        if not audit["values"]:
            out.append(_item(name, "not-applicable", reason="empty row"))
            continue
        out.append(_item(name, "pass" if audit["unimodal"] else "fail", **{k: audit[k] for k in ("p_start", "values", "violation_p")}))
    out.extend(schur_entry_checks(spec, decomps))
    if dec is None:
        try:
            dec = bs_decompose(columns_from_graded(graded))
        except IntegrityError as exc:  # report, do not abort the suite
            out.append(_item("bs-decomposition", "fail", reason=str(exc)))
            return out
    out.extend(bs_checks(spec, dec))
    return out
