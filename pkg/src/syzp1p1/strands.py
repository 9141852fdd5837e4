"""Strand bases, boundary matrices of the Koszul complex and the SMF matrix format.

A basis element of C_{p,q,a} = (wedge^p S_D (x) S_{qD+b})_a is a p-subset W of
monomial indices (into ``monomial_basis(D)``) together with the monomial f of
bidegree qD+b fixed by deg W + deg f = a.  Since f is determined by W, bases
are stored as integer arrays of shape (dim, p) in lexicographic order of W.

The boundary map sends (m_1 ^ ... ^ m_p) (x) f to
sum_i (-1)^i (m_1 ^ .. m_i-hat .. ^ m_p) (x) m_i f, with i counted from 1.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import FormatError
from .grading import EmbeddingSpec, canonical_multidegree, monomial_basis
from .hilbert import strand_dimension, wedge_window


@dataclass
class SparseMatrix:
    """Coordinate-format matrix over F_modulus with 0-based indices."""

    rows: int
    cols: int
    r: np.ndarray
    c: np.ndarray
    v: np.ndarray
    modulus: int

    @property
    def nnz(self) -> int:
        return int(self.r.size)

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.rows, self.cols), dtype=np.int64)
        A[self.r, self.c] = self.v
        return A

    @classmethod
    def from_dense(cls, A, modulus: int) -> "SparseMatrix":
        A = np.asarray(A, dtype=np.int64) % modulus
        r, c = np.nonzero(A)
        return cls(A.shape[0], A.shape[1], r.astype(np.int64), c.astype(np.int64), A[r, c], modulus)


@dataclass
class StrandMatrix(SparseMatrix):
    """Matrix of the boundary map C_{p,q,a} -> C_{p-1,q+1,a}; rows index the target."""

    spec: EmbeddingSpec = None
    p: int = 0
    q: int = 0
    a: tuple = (0, 0, 0, 0)
    meta: dict = field(default_factory=dict)


def matrix_name(p: int, q: int, a) -> str:
    return f"p{p}_q{q}_a{a[0]}-{a[1]}-{a[2]}-{a[3]}"


@lru_cache(maxsize=4)
def _suffix_prefix(d1: int, d2: int, pmax: int) -> np.ndarray:
    """SP[k, r] = 2D prefix sums of counts of r-subsets of monomials k..N-1 by (x0-sum, y0-sum)."""
    mons = monomial_basis((d1, d2))
    N = len(mons)
    X, Y = N * d1 + 1, N * d2 + 1
    cnt = np.zeros((N + 1, pmax + 1, X, Y), dtype=np.int64)
    cnt[N, 0, 0, 0] = 1
    for k in range(N - 1, -1, -1):
        m = mons[k]
        cnt[k] = cnt[k + 1]
        cnt[k, 1:, m.i:, m.j:] += cnt[k + 1, :-1, : X - m.i, : Y - m.j]
    sp = cnt.cumsum(axis=2).cumsum(axis=3)
    sp.setflags(write=False)
    return sp


def _table_depth(N: int, p: int) -> int:
    # full depth for small N; otherwise round up so nearby p share one table
    if N <= 24:
        return N
    return min(N, (p // 4 + 1) * 4)


def _box_counts(table: np.ndarray, k, x0, x1, y0, y1) -> np.ndarray:
    """Box sums of the 2D prefix tables table[k] over per-candidate boxes."""
    X, Y = table.shape[1], table.shape[2]
    x1c = np.minimum(x1, X - 1)
    y1c = np.minimum(y1, Y - 1)
    x0c = np.maximum(x0, 0)
    y0c = np.maximum(y0, 0)
    ok = (x0c <= x1c) & (y0c <= y1c)
    xa, ya = np.maximum(x0c - 1, 0), np.maximum(y0c - 1, 0)
    x1c, y1c = np.maximum(x1c, 0), np.maximum(y1c, 0)
    s = table[k, x1c, y1c]
    s = s - np.where(x0c > 0, table[k, xa, y1c], 0)
    s = s - np.where(y0c > 0, table[k, x1c, ya], 0)
    s = s + np.where((x0c > 0) & (y0c > 0), table[k, xa, ya], 0)
    return np.where(ok, s, 0)


def strand_basis(spec: EmbeddingSpec, p: int, q: int, a) -> np.ndarray:
    """Lexicographically ordered p-subsets W spanning C_{p,q,a}, as an int64 array (dim, p)."""
    win = wedge_window(spec, p, q, a)
    if win is None:
        return np.zeros((0, max(p, 0)), dtype=np.int64)
    if p == 0:
        return np.zeros((1, 0), dtype=np.int64)
    lo_x, hi_x, lo_y, hi_y = win
    mons = monomial_basis(spec.D)
    N = len(mons)
    mi = np.array([m.i for m in mons], dtype=np.int64)
    mj = np.array([m.j for m in mons], dtype=np.int64)
    sp = _suffix_prefix(spec.d1, spec.d2, _table_depth(N, p))
    ks = np.arange(N, dtype=np.int64)
    # partial subsets (lex ordered): chosen indices and running sums
    chosen = np.zeros((1, 0), dtype=np.int64)
    nxt = np.zeros(1, dtype=np.int64)
    sx = np.zeros(1, dtype=np.int64)
    sy = np.zeros(1, dtype=np.int64)
    for r in range(p):
        need = p - r - 1
        # extend each partial by every admissible next index; np.nonzero keeps lex order
        part, k = np.nonzero(nxt[:, None] <= ks[None, :])
        nsx = sx[part] + mi[k]
        nsy = sy[part] + mj[k]
        feas = _box_counts(sp[:, need], k + 1, lo_x - nsx, hi_x - nsx, lo_y - nsy, hi_y - nsy) > 0
        part, k = part[feas], k[feas]
        if part.size == 0:
            return np.zeros((0, p), dtype=np.int64)
        chosen = np.concatenate([chosen[part], k[:, None]], axis=1)
        nxt = k + 1
        sx, sy = nsx[feas], nsy[feas]
    return chosen


def _masks(W: np.ndarray) -> np.ndarray:
    if W.shape[1] == 0:
        return np.zeros(W.shape[0], dtype=np.int64)
    return (np.int64(1) << W).sum(axis=1)


def build_strand_matrix(spec: EmbeddingSpec, p: int, q: int, a) -> StrandMatrix:
    """Matrix of (d_{p,q})_a : C_{p,q,a} -> C_{p-1,q+1,a} over F_modulus."""
    a = tuple(int(x) for x in a)
    mod = spec.modulus
    src = strand_basis(spec, p, q, a)
    tgt = strand_basis(spec, p - 1, q + 1, a) if p >= 1 else np.zeros((0, 0), dtype=np.int64)
    rows, cols = tgt.shape[0], src.shape[0]
    empty = np.zeros(0, dtype=np.int64)
    if rows == 0 or cols == 0:
        return StrandMatrix(rows, cols, empty, empty.copy(), empty.copy(), mod, spec, p, q, a)
    tmask = _masks(tgt)
    order = np.argsort(tmask, kind="stable")
    sorted_masks = tmask[order]
    rr, cc, vv = [], [], []
    col_ids = np.arange(cols, dtype=np.int64)
    for i in range(p):
        keep = [k for k in range(p) if k != i]
        m = _masks(src[:, keep])
        pos = np.searchsorted(sorted_masks, m)
        if np.any(pos >= rows) or np.any(sorted_masks[np.minimum(pos, rows - 1)] != m):
            raise FormatError(f"face of a basis element missing from target basis at {matrix_name(p, q, a)}")
        rr.append(order[pos])
        cc.append(col_ids)
        # sign (-1)^(i+1) for the 0-based position i
        vv.append(np.full(cols, 1 if i % 2 == 1 else mod - 1, dtype=np.int64))
    r = np.concatenate(rr)
    c = np.concatenate(cc)
    v = np.concatenate(vv)
    srt = np.lexsort((r, c))
    return StrandMatrix(rows, cols, r[srt], c[srt], v[srt], mod, spec, p, q, a)


def compose_check(spec: EmbeddingSpec, p: int, q: int, a) -> bool:
    """True iff d_{p-1,q+1} o d_{p,q} vanishes on the strand through (p, q, a)."""
    first = build_strand_matrix(spec, p, q, a)
    second = build_strand_matrix(spec, p - 1, q + 1, a)
    return matrices_compose_to_zero(second, first)


def matrices_compose_to_zero(left: SparseMatrix, right: SparseMatrix) -> bool:
    if left.cols != right.rows:
        return False
    if left.nnz == 0 or right.nnz == 0:
        return True
    mod = left.modulus
    # join on the shared index: left (i, k) and right (k, j)
    lo = np.argsort(left.c, kind="stable")
    lk, li, lv = left.c[lo], left.r[lo], left.v[lo]
    starts = np.searchsorted(lk, right.r, side="left")
    ends = np.searchsorted(lk, right.r, side="right")
    counts = ends - starts
    total = int(counts.sum())
    if total == 0:
        return True
    rep = np.repeat(np.arange(right.nnz), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    li_idx = np.repeat(starts, counts) + offs
    out_r = li[li_idx]
    out_c = right.c[rep]
    out_v = (lv[li_idx] * right.v[rep]) % mod
    key = out_r * (right.cols + 1) + out_c
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.zeros(uniq.size, dtype=np.int64)
    np.add.at(sums, inv, out_v)
    return bool(np.all(sums % mod == 0))


def canonical_strands(spec: EmbeddingSpec, n: int) -> list:
    """Canonical multidegrees on the strand of bidegree nD + b."""
    ex = n * spec.d1 + spec.b1
    ey = n * spec.d2 + spec.b2
    if ex < 0 or ey < 0:
        return []
    out = []
    for a0 in range(ex, (ex - 1) // 2, -1):
        for a2 in range(ey, (ey - 1) // 2, -1):
            out.append((a0, ex - a0, a2, ey - a2))
    return out


# ---------------------------------------------------------------- SMF format

def _atomic_write_text(path: str, writer) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def smf_text_header(m: StrandMatrix) -> str:
    s = m.spec
    a = m.a
    return (
        "SMF 1\n"
        f"modulus {m.modulus}\n"
        f"spec {s.d1} {s.d2} {s.b1} {s.b2}\n"
        f"strand {m.p} {m.q}\n"
        f"multidegree {a[0]} {a[1]} {a[2]} {a[3]}\n"
        f"size {m.rows} {m.cols} {m.nnz}\n"
    )


def write_smf(m: StrandMatrix, path: str) -> None:
    def w(fh):
        fh.write(smf_text_header(m))
        if m.nnz:
            body = np.stack([m.r + 1, m.c + 1, m.v], axis=1)
            np.savetxt(fh, body, fmt="%d", delimiter=" ")

    _atomic_write_text(path, w)


def read_smf(path: str) -> StrandMatrix:
    with open(path, "r", newline="") as fh:
        text = fh.read()
    if "\r" in text:
        raise FormatError(f"{path}: SMF requires LF line endings")
    lines = text.split("\n", 6)
    if len(lines) < 6:
        raise FormatError(f"{path}: truncated header")

    def fields(line, tag, count):
        parts = line.split()
        if not parts or parts[0] != tag or len(parts) != count + 1:
            raise FormatError(f"{path}: expected '{tag}' line with {count} fields, got {line!r}")
        try:
            return [int(x) for x in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer field in {line!r}") from exc

    if lines[0] != "SMF 1":
        raise FormatError(f"{path}: bad magic line {lines[0]!r}")
    (mod,) = fields(lines[1], "modulus", 1)
    d1, d2, b1, b2 = fields(lines[2], "spec", 4)
    p, q = fields(lines[3], "strand", 2)
    a = tuple(fields(lines[4], "multidegree", 4))
    rows, cols, nnz = fields(lines[5], "size", 3)
    body = lines[6] if len(lines) > 6 else ""
    try:
        flat = np.array(body.split(), dtype=np.int64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer entry") from exc
    if flat.size != 3 * nnz:
        raise FormatError(f"{path}: expected {nnz} entries, found {flat.size / 3:g}")
    trip = flat.reshape(nnz, 3)
    r, c, v = trip[:, 0] - 1, trip[:, 1] - 1, trip[:, 2]
    spec = EmbeddingSpec(d1, d2, b1, b2, mod)
    m = StrandMatrix(rows, cols, r, c, v, mod, spec, p, q, a)
    validate(m, strict_signs=True, sorted_cols=True)
    return m


def validate(m: SparseMatrix, strict_signs: bool = False, sorted_cols: bool = False) -> None:
    """Raise FormatError on out-of-range coordinates or values, or duplicate coordinates."""
    if m.nnz == 0:
        return
    if m.r.min() < 0 or m.c.min() < 0 or m.r.max() >= m.rows or m.c.max() >= m.cols:
        raise FormatError("matrix coordinate out of range")
    if strict_signs:
        if not np.all((m.v == 1) | (m.v == m.modulus - 1)):
            raise FormatError("SMF entries must be 1 or modulus-1")
    elif m.v.min() < 0 or m.v.max() >= m.modulus:
        raise FormatError("matrix entry outside [0, modulus)")
    key = m.c * m.rows + m.r
    if sorted_cols:
        d = np.diff(key)
        if np.any(d == 0):
            raise FormatError("duplicate matrix coordinate")
        if np.any(d < 0):
            raise FormatError("SMF entries must be sorted by (col, row)")
    elif np.unique(key).size != key.size:
        raise FormatError("duplicate matrix coordinate")


def is_canonical(a) -> bool:
    return canonical_multidegree(a)[0] == tuple(a)


__all__ = [
    "SparseMatrix",
    "StrandMatrix",
    "build_strand_matrix",
    "canonical_strands",
    "compose_check",
    "matrix_name",
    "read_smf",
    "strand_basis",
    "strand_dimension",
    "validate",
    "write_smf",
]
