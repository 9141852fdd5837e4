"""Prime-field arithmetic and exact rank computation.

``sparse_rank`` runs a structured elimination: fill-free singleton pivots
first, then minimum-fill (Markowitz style) pivots on a dict-of-rows
representation, and hands the active submatrix to a blocked dense kernel once
its density crosses a threshold.  The dense kernel stores residues in float64
and relies on BLAS matrix products, which are exact because every partial sum
stays below 2**53.

``dense_rank_oracle`` is a separate plain Gaussian elimination used only to
cross-check the fast path.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ResourceError, UsageError
from .strands import SparseMatrix, validate

DENSE_THRESHOLD = 0.2
PANEL = 256


class FieldElement:
    """Residue class modulo a prime."""

    __slots__ = ("residue", "modulus")

    def __init__(self, value: int, modulus: int):
        self.modulus = modulus
        self.residue = value % modulus

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.modulus != self.modulus:
                raise UsageError("field elements from different moduli")
            return other.residue
        return other % self.modulus

    def __add__(self, other):
        return FieldElement(self.residue + self._coerce(other), self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.residue - self._coerce(other), self.modulus)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.residue, self.modulus)

    def __mul__(self, other):
        return FieldElement(self.residue * self._coerce(other), self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.residue, self.modulus)

    def inverse(self) -> "FieldElement":
        if self.residue == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.residue, self.modulus - 2, self.modulus), self.modulus)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other), self.modulus).inverse()

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.modulus == other.modulus and self.residue == other.residue
        return self.residue == other % self.modulus

    def __hash__(self):
        return hash((self.residue, self.modulus))

    def __repr__(self):
        return f"FieldElement({self.residue}, {self.modulus})"


def inv_mod(x: int, p: int) -> int:
    return pow(int(x), p - 2, p)


@dataclass
class RankReport:
    id: str
    rank: int
    elapsed_s: float
    peak_bytes: int
    strategy: str

    def to_json(self) -> dict:
        return asdict(self)


OVERHEAD_BYTES = 32 * 2**20


def memory_estimate(rows: int, cols: int, nnz: int) -> int:
    """Working-set model of sparse_rank in bytes.

    32 MiB interpreter overhead, 16 bytes per row/column of bookkeeping, and
    48 bytes per stored entry scaled by a fill allowance of 1 + log2(1 + min(rows, cols)).
    Monotone in each argument.
    """
    fill = 1.0 + math.log2(1 + min(rows, cols))
    return int(OVERHEAD_BYTES + 16 * (rows + cols) + 48 * nnz * fill)


def dense_bytes(rows: int, cols: int) -> int:
    # matrix plus one update temporary, float64
    return 16 * rows * cols


# ------------------------------------------------------------------ dense kernel

def _inverse_small(A: np.ndarray, p: int) -> np.ndarray:
    """Inverse of a small invertible matrix mod p by Gauss-Jordan (int64)."""
    k = A.shape[0]
    M = np.concatenate([A.astype(np.int64) % p, np.eye(k, dtype=np.int64)], axis=1)
    for j in range(k):
        piv = j + int(np.nonzero(M[j:, j])[0][0])
        if piv != j:
            M[[j, piv]] = M[[piv, j]]
        M[j] = (M[j] * inv_mod(M[j, j], p)) % p
        col = M[:, j].copy()
        col[j] = 0
        nz = np.nonzero(col)[0]
        if nz.size:
            M[nz] = (M[nz] - col[nz, None] * M[j][None, :]) % p
    return M[:, k:]


def _panel_pivots(P: np.ndarray, p: int):
    """Pivot (row, col) pairs of a panel found by elimination with lowest-row pivots."""
    P = P.astype(np.int64) % p
    m, w = P.shape
    free = np.ones(m, dtype=bool)
    rows, cols = [], []
    for j in range(w):
        cand = np.nonzero(free & (P[:, j] != 0))[0]
        if cand.size == 0:
            continue
        i = int(cand[0])
        rows.append(i)
        cols.append(j)
        free[i] = False
        others = cand[1:]
        if others.size and j + 1 < w:
            f = (P[others, j] * inv_mod(P[i, j], p)) % p
            P[others, j + 1:] = (P[others, j + 1:] - f[:, None] * P[i, j + 1:][None, :]) % p
        P[others, j] = 0
    return rows, cols


def dense_rank_blocked(A: np.ndarray, p: int, panel: int = PANEL) -> int:
    """Exact rank of a dense residue matrix by blocked Schur-complement elimination."""
    M = np.asarray(A, dtype=np.float64)
    if M.size == 0:
        return 0
    if M.shape[0] < M.shape[1]:
        M = M.T
    M = np.ascontiguousarray(M)
    # keep k * p^2 well inside the exact float64 range
    panel = max(1, min(panel, (2**52) // (p * p) - 1))
    rank = 0
    while M.shape[0] and M.shape[1]:
        w = min(panel, M.shape[1])
        prow, pcol = _panel_pivots(M[:, :w], p)
        k = len(prow)
        rest = M[:, w:]
        if k:
            rank += k
            keep = np.ones(M.shape[0], dtype=bool)
            keep[prow] = False
            Ainv = _inverse_small(M[np.ix_(prow, pcol)].astype(np.int64), p).astype(np.float64)
            X = np.fmod(M[np.ix_(keep, pcol)] @ Ainv, p)
            top = rest[prow]
            rest = rest[keep]
            if rest.size:
                rest -= X @ top
                np.fmod(rest, p, out=rest)
                rest[rest < 0] += p
        if rest.size == 0:
            break
        nz = np.any(rest != 0, axis=1)
        M = np.ascontiguousarray(rest[nz]) if not nz.all() else rest
    return rank


# ------------------------------------------------------------------ sparse phase

def _singleton_strip(m: SparseMatrix):
    """Fill-free pivots on singleton rows and columns; returns (rank, residual triplets)."""
    r, c, v = m.r, m.c, m.v
    rank = 0
    while r.size:
        ccount = np.bincount(c, minlength=m.cols)
        single_col = ccount[c] == 1
        if single_col.any():
            prow = np.unique(r[single_col])
            rank += prow.size
            keep = ~np.isin(r, prow)
            r, c, v = r[keep], c[keep], v[keep]
            continue
        rcount = np.bincount(r, minlength=m.rows)
        single_row = rcount[r] == 1
        if single_row.any():
            pcol = np.unique(c[single_row])
            rank += pcol.size
            keep = ~np.isin(c, pcol)
            r, c, v = r[keep], c[keep], v[keep]
            continue
        break
    return rank, r, c, v


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.peak = OVERHEAD_BYTES

    def charge(self, nbytes: int, what: str):
        nbytes = int(nbytes) + OVERHEAD_BYTES
        if nbytes > self.peak:
            self.peak = nbytes
        if self.limit is not None and nbytes > self.limit:
            raise ResourceError(f"{what} needs ~{nbytes} bytes, budget {self.limit}", estimate=nbytes)


def _markowitz(rows: dict, colrows: dict, p: int, threshold: float, budget: _Budget, to_end: bool):
    """Eliminate with min-count column / min-length row pivots.

    Returns (rank, rows, colrows) where rows/colrows describe the active
    remainder once density exceeds ``threshold`` (empty when finished).
    """
    rank = 0
    nnz = sum(len(x) for x in rows.values())
    heap = [(len(rs), col) for col, rs in colrows.items()]
    heapq.heapify(heap)
    while heap:
        if not to_end and rows:
            dens = nnz / (len(rows) * max(len(colrows), 1))
            if dens > threshold:
                break
        cnt, col = heapq.heappop(heap)
        rs = colrows.get(col)
        if rs is None:
            continue
        if len(rs) != cnt:
            heapq.heappush(heap, (len(rs), col))
            continue
        if not rs:
            del colrows[col]
            continue
        piv = min(rs, key=lambda i: (len(rows[i]), i))
        prow = rows.pop(piv)
        pinv = inv_mod(prow[col], p)
        for cc in prow:
            colrows[cc].discard(piv)
        nnz -= len(prow)
        rank += 1
        for i in sorted(rs):
            row = rows[i]
            f = (row[col] * pinv) % p
            before = len(row)
            for cc, pv in prow.items():
                nv = (row.get(cc, 0) - f * pv) % p
                if nv:
                    if cc not in row:
                        colrows[cc].add(i)
                        heapq.heappush(heap, (len(colrows[cc]), cc))
                    row[cc] = nv
                elif cc in row:
                    del row[cc]
                    colrows[cc].discard(i)
                    heapq.heappush(heap, (len(colrows[cc]), cc))
            nnz += len(row) - before
            if not row:
                del rows[i]
        del colrows[col]
        for cc in prow:
            if cc in colrows and not colrows[cc]:
                del colrows[cc]
        budget.charge(96 * nnz, "sparse elimination fill")
    return rank, rows, colrows


def sparse_rank(
    matrix: SparseMatrix,
    strategy: str = "auto",
    density_threshold: float = DENSE_THRESHOLD,
    budget: int | None = None,
    matrix_id: str = "",
) -> RankReport:
    """Exact rank over F_modulus."""
    t0 = time.perf_counter()
    if strategy not in ("auto", "sparse-elim", "dense"):
        raise UsageError(f"unknown rank strategy {strategy!r}")
    validate(matrix)
    p = matrix.modulus
    meter = _Budget(budget)
    if budget is not None:
        est = memory_estimate(matrix.rows, matrix.cols, matrix.nnz)
        if est > budget:
            raise ResourceError(f"{matrix_id or 'matrix'}: estimate {est} exceeds budget {budget}", estimate=est)
    if matrix.nnz == 0:
        return RankReport(matrix_id, 0, time.perf_counter() - t0, meter.peak, strategy)
    if strategy == "dense":
        meter.charge(dense_bytes(matrix.rows, matrix.cols), "dense kernel")
        rank = dense_rank_blocked(matrix.to_dense(), p)
        return RankReport(matrix_id, rank, time.perf_counter() - t0, meter.peak, "dense")
    meter.charge(48 * matrix.nnz, "sparse structure")
    rank, r, c, v = _singleton_strip(matrix)
    used = "singleton"
    if r.size:
        rows: dict = {}
        colrows: dict = {}
        for i, j, x in zip(r.tolist(), c.tolist(), v.tolist()):
            rows.setdefault(i, {})[j] = x
            colrows.setdefault(j, set()).add(i)
        k, rows, colrows = _markowitz(rows, colrows, p, density_threshold, meter, strategy == "sparse-elim")
        rank += k
        used += "+markowitz"
        if rows:
            ri = {i: n for n, i in enumerate(sorted(rows))}
            ci = {j: n for n, j in enumerate(sorted(colrows))}
            meter.charge(dense_bytes(len(ri), len(ci)), "dense kernel")
            A = np.zeros((len(ri), len(ci)), dtype=np.float64)
            for i, row in rows.items():
                for j, x in row.items():
                    A[ri[i], ci[j]] = x
            rank += dense_rank_blocked(A, p)
            used += "+dense"
    return RankReport(matrix_id, rank, time.perf_counter() - t0, meter.peak, used)


def dense_rank_oracle(matrix: SparseMatrix, budget: int | None = 2**30) -> int:
    """Rank by textbook Gaussian elimination on a dense int64 copy."""
    validate(matrix)
    if budget is not None and 8 * matrix.rows * matrix.cols > budget:
        raise ResourceError("dense oracle copy exceeds budget", estimate=8 * matrix.rows * matrix.cols)
    if matrix.rows == 0 or matrix.cols == 0:
        return 0
    p = matrix.modulus
    A = matrix.to_dense() % p
    rank = 0
    m, n = A.shape
    for j in range(n):
        if rank == m:
            break
        nz = np.nonzero(A[rank:, j])[0]
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            A[[rank, i]] = A[[i, rank]]
        A[rank] = (A[rank] * inv_mod(A[rank, j], p)) % p
        below = rank + 1 + np.nonzero(A[rank + 1:, j])[0]
        if below.size:
            A[below] = (A[below] - A[below, j][:, None] * A[rank][None, :]) % p
        rank += 1
    return rank


def rank_from_dense(A, modulus: int, **kw) -> RankReport:
    return sparse_rank(SparseMatrix.from_dense(A, modulus), **kw)
