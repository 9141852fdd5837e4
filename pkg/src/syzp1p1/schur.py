"""GL2 x GL2 characters and the greedy highest-weight decomposition of K_{p,q}.

A bipartition (l1, l2, m1, m2) stands for S_(l1,l2) (x) S_(m1,m2); its character
is the product of the two rank-2 Schur polynomials, a sum of monomials
t0^k t1^(l1+l2-k) t2^h t3^(m1+m2-h) with l2 <= k <= l1 and m2 <= h <= m1.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .errors import IntegrityError, UsageError
from .grading import DualMap


def _check(bp) -> tuple:
    bp = tuple(int(x) for x in bp)
    if len(bp) != 4 or bp[0] < bp[1] or bp[2] < bp[3] or bp[1] < 0 or bp[3] < 0:
        raise UsageError(f"{bp} is not a bipartition")
    return bp


def is_bipartition(w) -> bool:
    return len(w) == 4 and w[0] >= w[1] >= 0 and w[2] >= w[3] >= 0


def character(bp) -> dict:
    """{exponent: 1} over the support of S_bp's character."""
    l1, l2, m1, m2 = _check(bp)
    return {(k, l1 + l2 - k, h, m1 + m2 - h): 1 for k in range(l2, l1 + 1) for h in range(m2, m1 + 1)}


def schur_dim(bp) -> int:
    l1, l2, m1, m2 = _check(bp)
    return (l1 - l2 + 1) * (m1 - m2 + 1)


@dataclass
class SchurDecomposition:
    p: int
    q: int
    summands: Counter = field(default_factory=Counter)  # bipartition -> multiplicity

    def sorted(self) -> list:
        return sorted(self.summands.items(), key=lambda kv: kv[0], reverse=True)

    @property
    def dimension(self) -> int:
        return sum(m * schur_dim(bp) for bp, m in self.summands.items())

    def distinct(self) -> int:
        return len(self.summands)

    def with_multiplicity(self) -> int:
        return sum(self.summands.values())

    def max_multiplicity(self) -> int:
        return max(self.summands.values(), default=0)

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "summands": [[*bp, m] for bp, m in self.sorted()]}

    def render(self) -> str:
        if not self.summands:
            return f"K_{{{self.p},{self.q}}} = 0"
        parts = []
        for bp, m in self.sorted():
            s = "S_(" + ",".join(str(x) for x in bp) + ")"
            parts.append(s if m == 1 else f"{s}^{m}")
        return f"K_{{{self.p},{self.q}}} = " + " + ".join(parts)


def decompose_weights(weights: dict, p: int = 0, q: int = 0) -> SchurDecomposition:
    """Greedy loop: peel off the character of the lex-leading exponent until nothing is left."""
    residual = {a: v for a, v in weights.items() if v}
    if any(v < 0 for v in residual.values()):
        raise IntegrityError(f"K_{{{p},{q}}}: negative weight multiplicity in input")
    dec = SchurDecomposition(p, q)
    while residual:
        lead = max(residual)
        mult = residual[lead]
        if not is_bipartition(lead):
            raise IntegrityError(f"K_{{{p},{q}}}: leading weight {lead} is not a bipartition")
        for a in character(lead):
            v = residual.get(a, 0) - mult
            if v < 0:
                raise IntegrityError(f"K_{{{p},{q}}}: residual goes negative at {a} after removing {lead}")
            if v:
                residual[a] = v
            else:
                residual.pop(a, None)
        dec.summands[lead] += mult
    return dec


def decompose_strand(spec, p: int, q: int, slice_: dict) -> SchurDecomposition:
    """Decompose K_{p,q} from its orbit-expanded multigraded slice {a: count}."""
    total = (p + q) * (spec.d1 + spec.d2) + spec.b1 + spec.b2
    for a in slice_:
        if sum(a) != total:
            raise UsageError(f"multidegree {a} does not lie on the strand of K_{{{p},{q}}}")
    return decompose_weights(slice_, p, q)


def decompose_table(table) -> dict:
    """(p, q) -> SchurDecomposition for every nonzero K_{p,q} of a multigraded table."""
    g = table.collapse()
    return {(p, q): decompose_strand(table.spec, p, q, table.slice(p, q)) for (p, q) in g.nonzero()}


def dual_bipartition(w, dual: DualMap) -> tuple:
    """The w' with w + (w')^opp = alpha."""
    if dual.alpha is None:
        raise UsageError("weight duality unavailable: alpha is not integral")
    out = dual.weight(w)
    if not is_bipartition(out):
        raise IntegrityError(f"dual of {tuple(w)} is {out}, not a bipartition")
    return out


def redundancy_report(decomps: dict) -> dict:
    """Bipartitions occurring in both K_{p,q} and K_{p-1,q+1}; counted without multiplicity."""
    items = []
    for (p, q), dec in sorted(decomps.items()):
        other = decomps.get((p - 1, q + 1))
        if other is None:
            continue
        for bp in sorted(set(dec.summands) & set(other.summands), reverse=True):
            items.append({"bipartition": list(bp), "p": p, "q": q, "mult": dec.summands[bp], "mult_partner": other.summands[bp]})
    total = sum(d.distinct() for d in decomps.values())
    redundant_keys = {(it["p"], it["q"], tuple(it["bipartition"])) for it in items}
    partner_keys = {(it["p"] - 1, it["q"] + 1, tuple(it["bipartition"])) for it in items}
    redundant = len(redundant_keys | partner_keys)
    return {
        "pairs": items,
        "redundant_pairs": len(items),
        "redundant": redundant,
        "total": total,
        "percent": (100.0 * redundant / total) if total else 0.0,
    }


def decomps_to_json(decomps: dict) -> str:
    return json.dumps([decomps[k].to_json() for k in sorted(decomps)], separators=(",", ":")) + "\n"


def decomps_from_json(text: str) -> dict:
    out = {}
    for item in json.loads(text):
        dec = SchurDecomposition(item["p"], item["q"])
        for *bp, m in item["summands"]:
            dec.summands[tuple(bp)] = m
        out[(dec.p, dec.q)] = dec
    return out


def render_text(decomps: dict) -> str:
    return "\n".join(decomps[k].render() for k in sorted(decomps)) + "\n"
