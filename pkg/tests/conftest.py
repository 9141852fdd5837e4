import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from syzp1p1.grading import EmbeddingSpec  # noqa: E402


def spec_of(b, D, modulus=32003):
    return EmbeddingSpec(D[0], D[1], b[0], b[1], modulus)


@pytest.fixture
def quadric():
    return spec_of((0, 0), (1, 1))


from functools import lru_cache  # noqa: E402

from syzp1p1.betti import assemble  # noqa: E402
from syzp1p1.fflinalg import sparse_rank  # noqa: E402
from syzp1p1.grading import koszul_dual_spec  # noqa: E402
from syzp1p1.planning import relevant_range, window_from_rows  # noqa: E402
from syzp1p1.strands import build_strand_matrix  # noqa: E402


def ranks_for(plan):
    """Ranks of every job in a plan, computed in-process."""
    out = {}
    for j in plan.jobs:
        s = plan.spec if j.side == "primal" else koszul_dual_spec(plan.spec).dual_spec
        out[j.id] = sparse_rank(build_strand_matrix(s, j.p, j.q, j.a)).rank
    return out


def plan_for(b, D, mode="dual"):
    spec = spec_of(b, D)
    if mode == "default":
        return relevant_range(spec)
    if mode == "hints":
        return relevant_range(spec, hints=True)
    if mode == "dual":
        return relevant_range(spec, hints=True, dual_assist=True)
    if mode == "window":
        import golden

        return relevant_range(spec, window_from_rows(golden.BETTI[(b, D)]), hints=True)
    raise ValueError(mode)


@lru_cache(maxsize=None)
def table_for(b, D, mode="dual"):
    plan = plan_for(b, D, mode)
    return assemble(plan, ranks_for(plan))


def rows_equal(graded, rows) -> bool:
    """Graded table equals golden rows {q: values by p} with zeros elsewhere."""
    for q in (0, 1, 2):
        want = list(rows.get(q, []))
        got = graded.row(q)
        want += [0] * (len(got) - len(want))
        if got != want:
            return False
    return True


ACCEPTANCE: dict = {}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
