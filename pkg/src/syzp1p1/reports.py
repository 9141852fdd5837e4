"""Row distributions, unimodality audits, Schur-count statistics and CSV emitters."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

ROWS = (0, 1, 2)


@dataclass
class RowProfile:
    spec: object
    q: int
    ps: list = field(default_factory=list)
    values: list = field(default_factory=list)
    normalized: list = field(default_factory=list)

    @property
    def mean(self) -> Fraction:
        return sum((p * w for p, w in zip(self.ps, self.normalized)), Fraction(0))

    @property
    def variance(self) -> Fraction:
        m = self.mean
        return sum(((p - m) ** 2 * w for p, w in zip(self.ps, self.normalized)), Fraction(0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "value", "normalized_num", "normalized_den"])
        for p, v, x in zip(self.ps, self.values, self.normalized):
            w.writerow([p, v, x.numerator, x.denominator])
        return buf.getvalue()


def _support(seq: dict) -> list:
    """Keys from the first to the last nonzero value (inner zeros kept)."""
    nz = [k for k, v in seq.items() if v]
    if not nz:
        return []
    return list(range(min(nz), max(nz) + 1))


def row_distribution(table, q: int) -> RowProfile:
    """Row q of a GradedBettiTable over its support, with exact normalization."""
    row = {p: table.value(p, q) for p in range(table.spec.codim + 1)}
    ps = _support(row)
    vals = [row[p] for p in ps]
    total = sum(vals)
    norm = [Fraction(v, total) for v in vals] if total else []
    return RowProfile(table.spec, q, ps, vals, norm)


def unimodal_violation(values: list):
    """First index triple (i, j, k) with values[j] strictly below both values[i] and values[k], i < j < k."""
    best_left = None
    for j in range(1, len(values) - 1):
        if best_left is None or values[j - 1] > values[best_left]:
            best_left = j - 1
        if values[best_left] <= values[j]:
            continue
        for k in range(j + 1, len(values)):
            if values[k] > values[j]:
                return best_left, j, k
    return None


def _audit(name: str, q: int, seq: dict) -> dict:
    ps = _support(seq)
    vals = [seq.get(p, 0) for p in ps]
    bad = unimodal_violation(vals)
    return {
        "statistic": name,
        "q": q,
        "p_start": ps[0] if ps else None,
        "values": vals,
        "unimodal": bad is None,
        "violation_p": None if bad is None else [ps[i] for i in bad],
    }


def schur_counts(decomps: dict) -> dict:
    """(p, q) -> (distinct, with multiplicity, largest multiplicity)."""
    return {
        k: (d.distinct(), d.with_multiplicity(), d.max_multiplicity())
        for k, d in sorted(decomps.items())
    }


def unimodality_checks(table, decomps: dict | None = None) -> list:
    """Row Betti numbers, and if available Schur counts, audited for weak unimodality."""
    out = []
    for q in ROWS:
        out.append(_audit("betti", q, {p: table.value(p, q) for p in range(table.spec.codim + 1)}))
    if decomps:
        counts = schur_counts(decomps)
        for idx, name in ((1, "schur_with_multiplicity"), (2, "schur_max_multiplicity"), (0, "schur_distinct")):
            for q in ROWS:
                seq = {p: c[idx] for (p, qq), c in counts.items() if qq == q}
                if any(seq.values()):
                    out.append(_audit(name, q, seq))
    return out


def schur_counts_csv(decomps: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q", "distinct", "with_mult", "max_mult"])
    for (p, q), c in schur_counts(decomps).items():
        w.writerow([p, q, *c])
    return buf.getvalue()


def bs_coeffs_csv(dec, spec) -> str:
    """One line per term: j, delta, exact coefficient, coefficient over N! as a decimal."""
    nf = factorial(spec.N)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "delta", "a_num", "a_den", "normalized"])
    for j, (delta, c) in enumerate(dec.terms):
        b = c / nf
        w.writerow([j, " ".join(str(x) for x in delta), c.numerator, c.denominator, f"{float(b):.12g}"])
    return buf.getvalue()
