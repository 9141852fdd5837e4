"""Assembly of multigraded and graded Betti tables from ranks and Hilbert data."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import FormatError, IntegrityError, UsageError
from .grading import DualMap, EmbeddingSpec, canonical_multidegree, orbit
from .hilbert import euler_characteristic, forced_betti, numerator_coefficients, strand_dimension
from .planning import RangePlan, dual_position
from .strands import canonical_strands

RANK_COMPUTED = "rank-computed"
HILBERT_FORCED = "hilbert-forced"
SYMMETRY_EXPANDED = "symmetry-expanded"


@dataclass
class GradedBettiTable:
    """dim K_{p,q} keyed by (p, q); beta_{p, p+q} in the (i, j) convention."""

    spec: EmbeddingSpec
    entries: dict = field(default_factory=dict)

    def value(self, p: int, q: int) -> int:
        return self.entries.get((p, q), 0)

    def row(self, q: int) -> list:
        """Row q indexed by p = 0..codim."""
        return [self.value(p, q) for p in range(self.spec.codim + 1)]

    def rows(self) -> dict:
        return {q: self.row(q) for q in (0, 1, 2)}

    def nonzero(self) -> dict:
        return {k: v for k, v in sorted(self.entries.items()) if v}

    def beta(self, i: int, j: int) -> int:
        return self.value(i, j - i)


@dataclass
class MultigradedBettiTable:
    """Canonical-multidegree entries (p, a) -> (value, provenance); orbits are implicit."""

    spec: EmbeddingSpec
    entries: dict = field(default_factory=dict)

    def value(self, p: int, a) -> int:
        canon = canonical_multidegree(a)[0]
        hit = self.entries.get((p, canon))
        return 0 if hit is None else hit[0]

    def expanded(self) -> list:
        """Every nonzero entry over full S2 x S2 orbits, as (p, a, value, provenance)."""
        out = []
        for (p, a), (v, prov) in self.entries.items():
            if not v:
                continue
            for b in orbit(a):
                out.append((p, b, v, prov if b == a else SYMMETRY_EXPANDED))
        out.sort(key=lambda t: (t[0], tuple(-x for x in t[1])))
        return out

    def slice(self, p: int, q: int) -> dict:
        """Orbit-expanded multigraded data of K_{p,q}: {a: count}."""
        out = {}
        for (pp, a), (v, _) in self.entries.items():
            if pp != p or not v:
                continue
            if sum(a) != (p + q) * (self.spec.d1 + self.spec.d2) + self.spec.b1 + self.spec.b2:
                continue
            for b in orbit(a):
                out[b] = v
        return out

    def row_of(self, p: int, a) -> int:
        n = (a[0] + a[1] - self.spec.b1) // self.spec.d1
        return n - p

    def collapse(self) -> GradedBettiTable:
        g: dict = {}
        for p, a, v, _ in self.expanded():
            key = (p, self.row_of(p, a))
            g[key] = g.get(key, 0) + v
        return GradedBettiTable(self.spec, g)


# ------------------------------------------------------------------ assembly

def _direct_value(spec, p, q, a, ids, ranks, where):
    """dim - rank(out) - rank(in), or None when a needed rank is missing."""
    total = 0
    for jid in ids:
        if jid is None:
            continue
        if jid not in ranks:
            return None
        total += ranks[jid]
    v = strand_dimension(spec, p, q, a) - total
    if v < 0:
        raise IntegrityError(f"negative dim K_{{{p},{q}}} at a={a} ({where}): check ranks or window")
    return v


def _strand(spec: EmbeddingSpec, recipe, ranks: dict) -> dict:
    """q -> (value, provenance) on one canonical strand multidegree."""
    a = recipe.a
    pos = recipe.positions
    values: dict = {}
    unknown = []
    pair = []
    for q, kind in sorted(recipe.kinds.items()):
        p = pos[q]
        if kind == "zero":
            values[q] = (0, HILBERT_FORCED)
        elif kind in ("direct", "dual"):
            ids = recipe.jobs.get(q, (None, None))
            if kind == "direct":
                v = _direct_value(spec, p, q, a, ids, ranks, "primal")
            else:
                dspec, pp, qq, aa = dual_position(spec, p, q, a)
                v = _direct_value(dspec, pp, qq, aa, ids, ranks, f"dual {dspec.label()}")
            if v is None:
                unknown.append(q)
            else:
                values[q] = (v, RANK_COMPUTED)
        elif kind == "forced":
            unknown.append(q)
        elif kind == "pair":
            pair.append(q)
        else:
            raise UsageError(f"unknown recipe kind {kind!r}")
    if not unknown and not pair:
        return values
    E = euler_characteristic(spec, a)
    known = {pos[q]: v for q, (v, _) in values.items()}
    if pair:
        if unknown:
            raise IntegrityError(f"strand a={a}: missing ranks leave a pair and {unknown} undetermined")
        rest = E - sum((-1) ** p * v for p, v in known.items())
        for q in pair:
            values[q] = (0, HILBERT_FORCED)
        if rest:
            hit = [q for q in pair if (-1) ** pos[q] * rest > 0]
            values[hit[0]] = (abs(rest), HILBERT_FORCED)
        return values
    forced = forced_betti(spec, a, {pos[q] for q in unknown}, known=known, numerator=E)
    if forced is None:
        raise IntegrityError(f"strand a={a}: positions {unknown} lack ranks and cannot be forced")
    for q in unknown:
        values[q] = (forced[pos[q]], HILBERT_FORCED)
    return values


def assemble(plan: RangePlan, ranks: dict) -> MultigradedBettiTable:
    """Replay the plan's recipes with the given {job id: rank}."""
    spec = plan.spec
    table = MultigradedBettiTable(spec)
    for recipe in plan.recipes:
        for q, (v, prov) in _strand(spec, recipe, ranks).items():
            if v:
                table.entries[(recipe.positions[q], recipe.a)] = (v, prov)
    return table


def check_hilbert(table: MultigradedBettiTable) -> dict:
    """Compare alternating sums with the numerator of the Hilbert series, per multidegree."""
    spec = table.spec
    signed: dict = {}
    unsigned: dict = {}
    for (p, a), (v, _) in table.entries.items():
        signed[a] = signed.get(a, 0) + (-1) ** p * v
        unsigned[a] = unsigned.get(a, 0) + v
    degs = []
    for n in range(0, spec.N + 3):
        degs.extend(canonical_strands(spec, n))
    degs = sorted(set(degs) | set(signed))
    num = numerator_coefficients(spec, degs)
    bad = [a for a in degs if num[a] != signed.get(a, 0)]
    bad_unsigned = [a for a in degs if num[a] != unsigned.get(a, 0)]
    return {
        "multidegrees": len(degs),
        "signed_mismatches": len(bad),
        "unsigned_mismatches": len(bad_unsigned),
        "convention": "alternating" if not bad else ("unsigned" if not bad_unsigned else "neither"),
        "first_mismatches": [list(a) for a in bad[:5]],
        "ok": not bad,
    }


def check_duality(table_a: GradedBettiTable, table_b: GradedBettiTable, dual: DualMap) -> list:
    """(p, q, dim in B, rotated dim from A) wherever B is not the rotation of A."""
    if table_b.spec.key() != dual.dual_spec.key() or table_a.spec.key() != dual.spec.key():
        raise UsageError("check_duality: tables do not match the dual pair")
    codim = dual.spec.codim
    out = []
    for q in (0, 1, 2):
        for p in range(codim + 1):
            pa, qa = dual.index_map(p, q)
            vb, va = table_b.value(p, q), table_a.value(pa, qa)
            if vb != va:
                out.append((p, q, vb, va))
    return out


def check_multigraded_duality(table_a: MultigradedBettiTable, table_b: MultigradedBettiTable, dual: DualMap) -> list:
    """Entries where K_{p,q}(b')_a' differs from K_{codim-p,2-q}(b)_a under a' = alpha - a^opp."""
    out = []
    for p, a, v, _ in table_a.expanded():
        q = table_a.row_of(p, a)
        pp, _ = dual.index_map(p, q)
        w = dual.weight(a)
        if table_b.value(pp, w) != v:
            out.append((p, tuple(a), v, table_b.value(pp, w)))
    nb = sum(1 for _ in table_b.expanded())
    na = sum(1 for _ in table_a.expanded())
    if na != nb:
        out.append(("count", na, nb))
    return out


# ------------------------------------------------------------------ rendering

def render_m2(table: GradedBettiTable) -> str:
    """Macaulay2-style text: column header, total line, rows 'q:' with '.' for zero."""
    nz = table.nonzero()
    if not nz:
        return "       \ntotal:\n"
    width = max(p for p, _ in nz) + 1
    qs = [q for q in (0, 1, 2) if any(k[1] == q for k in nz)]
    qrange = list(range(0, max(qs) + 1))
    cells = {q: [str(table.value(p, q)) if table.value(p, q) else "." for p in range(width)] for q in qrange}
    totals = [str(sum(table.value(p, q) for q in qrange)) for p in range(width)]
    header = [str(p) for p in range(width)]
    cols = [max(len(header[p]), len(totals[p]), *(len(cells[q][p]) for q in qrange)) for p in range(width)]
    lab = max(len("total:"), *(len(f"{q}:") for q in qrange))

    def line(label, items):
        return label.rjust(lab) + " " + " ".join(s.rjust(w) for s, w in zip(items, cols))

    lines = [line("", header), line("total:", totals)]
    lines += [line(f"{q}:", cells[q]) for q in qrange]
    return "\n".join(x.rstrip() for x in lines) + "\n"


def parse_m2(text: str) -> dict:
    """{q: [values by p]} from an m2 rendering ('.' read as zero)."""
    rows = {}
    for raw in text.splitlines():
        parts = raw.split()
        if not parts or not parts[0].endswith(":") or parts[0] == "total:":
            continue
        rows[int(parts[0][:-1])] = [0 if x == "." else int(x) for x in parts[1:]]
    return rows


def table_to_json(mt: MultigradedBettiTable) -> str:
    spec = mt.spec
    g = mt.collapse()
    doc = {
        "spec": {**spec.key(), "modulus": spec.modulus},
        "multigraded": [[p, list(a), v, prov] for p, a, v, prov in mt.expanded()],
        "graded": [[p, q, v] for (p, q), v in g.nonzero().items()],
    }
    return json.dumps(doc, indent=None, separators=(",", ":")) + "\n"


def table_from_json(text: str) -> MultigradedBettiTable:
    try:
        doc = json.loads(text)
        s = doc["spec"]
        spec = EmbeddingSpec(s["d1"], s["d2"], s["b1"], s["b2"], s.get("modulus", 32003))
        mt = MultigradedBettiTable(spec)
        for p, a, v, prov in doc["multigraded"]:
            if prov == SYMMETRY_EXPANDED:
                continue
            mt.entries[(p, tuple(a))] = (v, prov)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"malformed Betti table JSON: {exc}") from exc
    return mt


def graded_from_rows(spec: EmbeddingSpec, rows: dict) -> GradedBettiTable:
    g = {}
    for q, vals in rows.items():
        for p, v in enumerate(vals):
            if v:
                g[(p, q)] = v
    return GradedBettiTable(spec, g)


def render_csv(mt: MultigradedBettiTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q", "a0", "a1", "a2", "a3", "value", "provenance"])
    for p, a, v, prov in mt.expanded():
        w.writerow([p, mt.row_of(p, a), *a, v, prov])
    return buf.getvalue()


def render_table(table, fmt: str = "m2") -> str:
    """Render a multigraded table as m2 (graded), json or csv (both lossless for json/csv)."""
    if fmt == "m2":
        g = table.collapse() if isinstance(table, MultigradedBettiTable) else table
        return render_m2(g)
    if fmt == "json":
        return table_to_json(table)
    if fmt == "csv":
        return render_csv(table)
    raise UsageError(f"unknown table format {fmt!r}")
