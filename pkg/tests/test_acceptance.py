"""Acceptance criteria 1-7; each records one pass/fail line shown in the terminal summary."""

import os
from fractions import Fraction
from math import factorial

import numpy as np
import pytest

from conftest import ranks_for, record_criterion, rows_equal, spec_of, table_for
from golden import (
    BETTI,
    BS_DELTAS_0025,
    BS_FACTORS_0025,
    DISTINCT_SCHUR_0034_Q1,
    K80_2233,
    K80_2233_DIMS,
    ROW_WINDOW_38,
    PLAN_COUNTS,
    PLAN_LARGEST,
    SCHUR_1223,
)
from syzp1p1 import orchestrator as orch
from syzp1p1.betti import assemble, check_duality, check_hilbert
from syzp1p1.bs import bs_decompose, columns_from_graded, columns_from_rows, pure_diagram
from syzp1p1.fflinalg import dense_rank_oracle, sparse_rank
from syzp1p1.grading import koszul_dual_spec
from syzp1p1.planning import compare_plans, parse_window, relevant_range, window_from_rows
from syzp1p1.reports import unimodality_checks
from syzp1p1.schur import decompose_table, decompose_weights, dual_bipartition, schur_dim
from syzp1p1.strands import SparseMatrix, build_strand_matrix, canonical_strands, compose_check

GOLDEN_RUNS = [
    ((0, 0), (2, 2)),
    ((0, 0), (2, 3)),
    ((1, 1), (2, 3)),
    ((0, 0), (2, 4)),
    ((1, 1), (2, 4)),
    ((0, 0), (3, 3)),
    ((1, 1), (3, 3)),
]


@pytest.fixture(scope="module")
def pipeline_tables(tmp_path_factory):
    """Plan, execute and assemble each golden spec with the conservative default plan."""
    out = {}
    for b, D in GOLDEN_RUNS:
        d = tmp_path_factory.mktemp(f"run_{b[0]}{b[1]}_{D[0]}{D[1]}")
        man = orch.plan(spec_of(b, D))
        orch.write_manifest(man, d)
        store = orch.execute(man, d)
        assert not store.failed()
        out[(b, D)] = assemble(man.plan(), store.ranks())
    return out


def test_criterion_1_golden_betti_tables(pipeline_tables):
    bad = [k for k in GOLDEN_RUNS if not rows_equal(pipeline_tables[k].collapse(), BETTI[k])]
    g = pipeline_tables[((0, 0), (2, 2))].collapse()
    spot = g.row(1)[1:6] == [20, 64, 90, 64, 20] and g.beta(6, 8) == 1
    ok = not bad and spot
    record_criterion(1, ok, f"{len(GOLDEN_RUNS) - len(bad)}/{len(GOLDEN_RUNS)} golden tables exact" + (f"; mismatches {bad}" if bad else ""))
    assert ok


def test_criterion_2_schur_golden_data():
    k80 = decompose_table(table_for((2, 2), (3, 3), mode="hints"))[(8, 0)]
    k80_ok = [bp for bp, _ in k80.sorted()] == K80_2233 and set(k80.summands.values()) == {1}
    dims_ok = [schur_dim(bp) for bp in K80_2233] == K80_2233_DIMS
    app = {k: dict(v.summands) for k, v in decompose_table(table_for((1, 2), (2, 3), mode="hints")).items()}
    app_ok = app == SCHUR_1223
    ok = k80_ok and dims_ok and app_ok
    record_criterion(2, ok, f"K_8,0((2,2);(3,3)) {'exact' if k80_ok and dims_ok else 'differs'}; (1,2);(2,3) decomposition {'exact' if app_ok else 'differs'}")
    assert ok


def test_criterion_3_duality(pipeline_tables):
    a = pipeline_tables[((0, 0), (3, 3))]
    b = pipeline_tables[((1, 1), (3, 3))]
    dual = koszul_dual_spec(a.spec)
    rotation = check_duality(a.collapse(), b.collapse(), dual)
    weight_ok = dual_bipartition((23, 13, 18, 18), dual) == (10, 0, 5, 5)
    ok = not rotation and weight_ok
    record_criterion(3, ok, f"180-degree rotation mismatches: {len(rotation)}; dual of (23,13,18,18) -> {dual_bipartition((23, 13, 18, 18), dual)}")
    assert ok


def test_criterion_4_boij_soederberg():
    pi_ok = pure_diagram((0, 1, 3, 4)) == [Fraction(1, 12), Fraction(1, 6), Fraction(1, 6), Fraction(1, 12)]
    mt = table_for((0, 0), (2, 5), mode="hints")
    table_ok = rows_equal(mt.collapse(), BETTI[((0, 0), (2, 5))])
    dec = bs_decompose(columns_from_graded(mt.collapse()))
    f15 = factorial(15)
    terms_ok = [list(d) for d, _ in dec.terms] == BS_DELTAS_0025 and [c for _, c in dec.terms] == [k * f15 for k in BS_FACTORS_0025]
    ok = pi_ok and table_ok and terms_ok
    coeffs = ", ".join(f"{c / f15}*15!" for _, c in dec.terms)
    record_criterion(4, ok, f"pi_(0,1,3,4) {'exact' if pi_ok else 'differs'}; beta(0;(2,5)) decomposition: {coeffs}")
    assert ok


def _distinct_q1(mt):
    audits = unimodality_checks(mt.collapse(), decompose_table(mt))
    return next(a for a in audits if a["statistic"] == "schur_distinct" and a["q"] == 1)


def test_criterion_5_conjecture_report():
    key = ((0, 0), (3, 4))
    window = window_from_rows(BETTI[key])
    plan = relevant_range(spec_of(*key), window, hints=True, dual_assist=True)
    mt = assemble(plan, ranks_for(plan))
    table_ok = rows_equal(mt.collapse(), BETTI[key])
    audit = _distinct_q1(mt)
    ok = table_ok and audit["values"] == DISTINCT_SCHUR_0034_Q1 and not audit["unimodal"]
    record_criterion(5, ok, f"(0,0);(3,4) q=1 distinct Schur counts {tuple(audit['values'])}, non-unimodal at p={audit['violation_p']}")
    assert ok


@pytest.mark.slow
@pytest.mark.skipif(not os.environ.get("SYZ_SLOW"), reason="set SYZ_SLOW=1 to rank the primal (3,4) range")
def test_criterion_5_primal_ranks_only():
    key = ((0, 0), (3, 4))
    plan = relevant_range(spec_of(*key), window_from_rows(BETTI[key]), hints=True)
    assert plan.total_jobs == PLAN_COUNTS[key]
    mt = assemble(plan, ranks_for(plan))
    assert rows_equal(mt.collapse(), BETTI[key])
    assert _distinct_q1(mt)["values"] == DISTINCT_SCHUR_0034_Q1


def test_criterion_6_planning_fidelity():
    spec = spec_of((2, 2), (3, 8))
    win = relevant_range(spec, parse_window(ROW_WINDOW_38), hints=True)
    cmp = compare_plans(win, relevant_range(spec))
    big = win.largest()
    m = build_strand_matrix(spec, big.p, big.q, big.a)
    size = (m.cols, int(np.unique(m.r).size))
    del m
    ok = win.total_jobs == PLAN_COUNTS[((2, 2), (3, 8))] and cmp["default_is_superset"] and size == PLAN_LARGEST[((2, 2), (3, 8))]
    record_criterion(
        6, ok,
        f"window plan {win.total_jobs} jobs; default plan {cmp['default_jobs']} jobs, superset: {cmp['default_is_superset']}; "
        f"largest {size[0]} x {size[1]} nonzero rows",
    )
    assert ok


def test_criterion_6_other_plan_counts():
    for key, n in PLAN_COUNTS.items():
        if key == ((2, 2), (3, 8)):
            continue
        b, D = key
        window = window_from_rows(BETTI[key]) if key in BETTI else {}
        plan = relevant_range(spec_of(b, D), window, hints=True)
        assert plan.total_jobs == n, key
        if key in PLAN_LARGEST:
            big = plan.largest()
            m = build_strand_matrix(spec_of(b, D), big.p, big.q, big.a)
            assert (m.cols, int(np.unique(m.r).size)) == PLAN_LARGEST[key], key


def _random_sparse(rng, modulus=32003):
    rows, cols = (int(x) for x in rng.integers(1, 201, size=2))
    nnz = int(rng.integers(0, min(rows * cols, 4 * (rows + cols)) + 1))
    idx = rng.choice(rows * cols, size=nnz, replace=False)
    r, c = np.divmod(idx, cols)
    v = rng.integers(1, modulus, size=nnz)
    m = SparseMatrix(rows, cols, r.astype(np.int64), c.astype(np.int64), v.astype(np.int64), modulus)
    if rng.random() < 0.3 and rows > 2:
        # force dependencies: copy a scaled row onto another
        A = m.to_dense()
        A[rows - 1] = (A[0] * 7 + A[1]) % modulus
        m = SparseMatrix.from_dense(A, modulus)
    return m


def test_criterion_7_property_suites(pipeline_tables, tmp_path):
    failures = []
    # d o d = 0 on every strand for D <= (2,3)
    strands = 0
    for d1 in (1, 2):
        for d2 in (1, 2, 3):
            for b in ((0, 0), (1, 0), (0, 1), (1, 1)):
                spec = spec_of(b, (d1, d2))
                for n in range(2, spec.N + 3):
                    for a in canonical_strands(spec, n):
                        for q in (0, 1, 2):
                            p = n - q
                            if 2 <= p <= spec.N:
                                strands += 1
                                if not compose_check(spec, p, q, a):
                                    failures.append(("compose", b, (d1, d2), p, q, a))
    # alternating sums equal Hilbert numerator coefficients on every completed run
    for key, mt in pipeline_tables.items():
        if not check_hilbert(mt)["ok"]:
            failures.append(("hilbert", key))
    # sparse rank equals the dense oracle
    rng = np.random.default_rng(32003)
    for i in range(200):
        m = _random_sparse(rng)
        if sparse_rank(m).rank != dense_rank_oracle(m):
            failures.append(("rank", i))
    # Schur decompose o character round trip
    for i in range(500):
        ms = {}
        for _ in range(int(rng.integers(1, 6))):
            l2, m2 = (int(x) for x in rng.integers(0, 21, size=2))
            bp = (int(rng.integers(l2, 21)), l2, int(rng.integers(m2, 21)), m2)
            ms[bp] = ms.get(bp, 0) + int(rng.integers(1, 4))
        weights = {}
        for (l1, l2, m1, m2), mult in ms.items():
            for k in range(l2, l1 + 1):
                for h in range(m2, m1 + 1):
                    w = (k, l1 + l2 - k, h, m1 + m2 - h)
                    weights[w] = weights.get(w, 0) + mult
        if dict(decompose_weights(weights).summands) != ms:
            failures.append(("schur", i))
    # BS reconstruction on every decomposition
    for key, rows in BETTI.items():
        cols = columns_from_rows(rows, spec_of(*key).codim + 1)
        if bs_decompose(cols).reconstruct(len(cols)) != [{j: v for j, v in c.items() if v} for c in cols]:
            failures.append(("bs", key))
    # determinism across 1 and 8 workers
    ranks = []
    for workers in (1, 8):
        d = tmp_path / f"w{workers}"
        man = orch.plan(spec_of((0, 0), (2, 2)))
        orch.write_manifest(man, d)
        ranks.append(orch.execute(man, d, workers=workers).ranks())
    if ranks[0] != ranks[1]:
        failures.append(("determinism",))
    ok = not failures
    record_criterion(7, ok, f"{strands} strands d o d = 0, Hilbert on {len(pipeline_tables)} runs, 200 ranks, 500 Schur round trips, "
                     f"{len(BETTI)} BS reconstructions, 1 vs 8 workers" + (f"; failures {failures[:5]}" if failures else ""))
    assert ok
