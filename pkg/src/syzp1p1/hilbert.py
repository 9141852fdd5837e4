"""Strand dimensions, Hilbert numerator coefficients and Hilbert-forced Betti numbers.

Two independent routes are provided:

* ``strand_dimension`` counts basis elements of (wedge^p S_D (x) S_{qD+b})_a with
  a subset-sum table over the N monomials of S_D.
* ``numerator_coefficient`` expands the product of (1 - t^m) over the degree-D
  monomials, truncated at the queried multidegree.

Their agreement, sum_p (-1)^p dim C_{p,n-p,a} = numerator(a), is the Euler
characteristic identity that ties ranks to the Hilbert series.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import IntegrityError
from .grading import EmbeddingSpec, monomial_basis, strand_index


@lru_cache(maxsize=8)
def wedge_sum_table(d1: int, d2: int) -> np.ndarray:
    """T[p, sx, sy] = number of p-subsets of S_D monomials whose x0 and y0 exponents sum to (sx, sy)."""
    N = (d1 + 1) * (d2 + 1)
    dp = np.zeros((N + 1, N * d1 + 1, N * d2 + 1), dtype=np.int64)
    dp[0, 0, 0] = 1
    X, Y = dp.shape[1], dp.shape[2]
    for m in monomial_basis((d1, d2)):
        # descending p so each monomial is used at most once
        for p in range(N, 0, -1):
            dp[p, m.i:, m.j:] += dp[p - 1, : X - m.i, : Y - m.j]
    dp.setflags(write=False)
    return dp


@lru_cache(maxsize=8)
def _wedge_prefix(d1: int, d2: int) -> np.ndarray:
    pre = wedge_sum_table(d1, d2).cumsum(axis=1).cumsum(axis=2)
    pre.setflags(write=False)
    return pre


def _box_sum(pre: np.ndarray, p: int, x0: int, x1: int, y0: int, y1: int) -> int:
    if x0 > x1 or y0 > y1:
        return 0
    s = pre[p, x1, y1]
    if x0 > 0:
        s -= pre[p, x0 - 1, y1]
    if y0 > 0:
        s -= pre[p, x1, y0 - 1]
    if x0 > 0 and y0 > 0:
        s += pre[p, x0 - 1, y0 - 1]
    return int(s)


def wedge_window(spec: EmbeddingSpec, p: int, q: int, a) -> tuple[int, int, int, int] | None:
    """Range (sx_lo, sx_hi, sy_lo, sy_hi) of wedge x0/y0 exponent sums compatible with (p, q, a).

    Returns None when the graded piece is empty for degree reasons.
    """
    N = spec.N
    if p < 0 or p > N or q < 0:
        return None
    e1 = q * spec.d1 + spec.b1
    e2 = q * spec.d2 + spec.b2
    if e1 < 0 or e2 < 0 or min(a) < 0:
        return None
    n = p + q
    if a[0] + a[1] != n * spec.d1 + spec.b1 or a[2] + a[3] != n * spec.d2 + spec.b2:
        return None
    lo_x = max(0, a[0] - e1)
    hi_x = min(a[0], p * spec.d1)
    lo_y = max(0, a[2] - e2)
    hi_y = min(a[2], p * spec.d2)
    if lo_x > hi_x or lo_y > hi_y:
        return None
    return lo_x, hi_x, lo_y, hi_y


def strand_dimension(spec: EmbeddingSpec, p: int, q: int, a) -> int:
    """dim (wedge^p S_D (x) S_{qD+b})_a."""
    win = wedge_window(spec, p, q, a)
    if win is None:
        return 0
    pre = _wedge_prefix(spec.d1, spec.d2)
    return _box_sum(pre, p, *win)


def _truncated_product(spec: EmbeddingSpec, box) -> np.ndarray:
    """Coefficients of prod_m (1 - t^m) over degree-D monomials, truncated to exponents <= box."""
    shape = tuple(int(x) + 1 for x in box)
    P = np.zeros(shape, dtype=np.int64)
    P[0, 0, 0, 0] = 1
    d1, d2 = spec.d1, spec.d2
    for m in monomial_basis(spec.D):
        e = (m.i, d1 - m.i, m.j, d2 - m.j)
        if any(e[k] >= shape[k] for k in range(4)):
            continue
        src = P[: shape[0] - e[0], : shape[1] - e[1], : shape[2] - e[2], : shape[3] - e[3]].copy()
        P[e[0]:, e[1]:, e[2]:, e[3]:] -= src
    return P


def _layer_mask(spec: EmbeddingSpec, shape, n: int) -> np.ndarray:
    # B is supported on e with e0+e1 = p*d1; keep p <= n (module pieces S_{kD+b}, k >= 0)
    ex = np.arange(shape[0])[:, None] + np.arange(shape[1])[None, :]
    return (ex <= n * spec.d1)[:, :, None, None]


def numerator_coefficient(spec: EmbeddingSpec, a) -> int:
    """Coefficient of t^a in HilbertSeries(S(b;D)) * prod_m (1 - t^m).

    Equals sum_p (-1)^p beta_{p,a}.
    """
    if min(a) < 0:
        return 0
    n = strand_index(spec, a)
    if n is None or n < 0:
        return 0
    P = _truncated_product(spec, a)
    # t^e contributes iff a - e lies in some S_{kD+b}, k >= 0; bidegrees force k = n - p
    P = np.where(_layer_mask(spec, P.shape, n), P, 0)
    return int(P.sum())


def numerator_coefficients(spec: EmbeddingSpec, multidegrees) -> dict:
    """Batch form of numerator_coefficient sharing one truncated product per strand."""
    out = {}
    by_strand: dict[int, list] = {}
    for a in multidegrees:
        a = tuple(int(x) for x in a)
        n = strand_index(spec, a) if min(a) >= 0 else None
        if n is None or n < 0:
            out[a] = 0
        else:
            by_strand.setdefault(n, []).append(a)
    for n, items in by_strand.items():
        box = tuple(max(a[k] for a in items) for k in range(4))
        P = _truncated_product(spec, box)
        P = np.where(_layer_mask(spec, P.shape, n), P, 0)
        C = P.cumsum(0).cumsum(1).cumsum(2).cumsum(3)
        for a in items:
            out[a] = int(C[a])
    return out


def euler_characteristic(spec: EmbeddingSpec, a) -> int:
    """sum_p (-1)^p dim C_{p, n-p, a} via strand dimensions (the second route)."""
    n = strand_index(spec, a)
    if n is None or min(a) < 0:
        return 0
    total = 0
    for p in range(0, min(n, spec.N) + 1):
        total += (-1) ** p * strand_dimension(spec, p, n - p, a)
    return total


def forced_betti(spec: EmbeddingSpec, a, unknown_ps, known=None, numerator=None):
    """Resolve at most one unknown beta_{p,a} from the alternating-sum identity.

    ``known`` maps p to the known beta_{p,a}; missing p outside ``unknown_ps``
    count as zero.  Returns a dict {p: value} (empty when nothing is unknown)
    or None when two or more values remain undetermined.
    """
    unknown_ps = set(unknown_ps)
    if len(unknown_ps) > 1:
        return None
    known = known or {}
    if numerator is None:
        numerator = numerator_coefficient(spec, a)
    rest = numerator - sum((-1) ** p * v for p, v in known.items() if p not in unknown_ps)
    if not unknown_ps:
        if rest != 0:
            raise IntegrityError(f"Hilbert identity fails at a={tuple(a)}: residual {rest}")
        return {}
    (p,) = unknown_ps
    value = (-1) ** p * rest
    if value < 0:
        raise IntegrityError(
            f"forced beta_{{{p},{tuple(a)}}} = {value} is negative (wrong rank or vanishing assumption)"
        )
    return {p: value}
