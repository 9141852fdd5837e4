"""Relevant-range planning: which boundary-matrix ranks are needed, per strand.

Every canonical multidegree ``a`` on the strand of bidegree nD + b carries up
to three Koszul positions (n, 0), (n-1, 1), (n-2, 2).  A position is *direct*
when its value is read off from ranks,

    K_{p,q,a} = dim C_{p,q,a} - rank(d_{p,q})_a - rank(d_{p+1,q-1})_a,

and *forced* when it follows from the alternating-sum identity once the rest
of the strand is known.  The planner decides this per strand; assembly replays
the same decisions.

Modes
-----
default   every position with positive dimension is unknown; all but the
          highest-q unknown are computed directly.
window    explicit per-row p-intervals (the relevant range).  Positions outside
          the window are zero when adjacent to a window position; isolated
          runs outside the window are settled by the sign of the Hilbert
          numerator where possible.
hints     the default mode restricted by standard vanishing statements:
          K_{p,0} = 0 for p >= h0(b), K_{p,2} = 0 for codim - p >= h0(b'),
          and the generation-degree vanishing of K_{0,q} and K_{codim,q}.
          These are optional hints, checked afterwards through the Hilbert
          identity and nonnegativity.

With ``dual_assist`` a position may instead be computed on the Koszul-dual
side, where K_{p,q}(b)_a = K_{codim-p, 2-q}(b')_{a'} and a' = alpha - a^opp.
The forced position is then the most expensive one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import UsageError
from .grading import EmbeddingSpec, canonical_multidegree, h0, koszul_dual_spec
from .hilbert import euler_characteristic, strand_dimension
from .strands import canonical_strands, matrix_name

ROWS = (0, 1, 2)


def parse_window(text: str | None) -> dict | None:
    """Parse ``"q0:4-8,q1:3-7"`` into {0: (4, 8), 1: (3, 7)}.  An empty string is an empty window."""
    if text is None:
        return None
    text = text.strip()
    out: dict = {}
    if not text:
        return out
    for part in text.split(","):
        m = re.fullmatch(r"\s*q(\d+)\s*:\s*(\d+)\s*-\s*(\d+)\s*", part)
        if not m:
            raise UsageError(f"bad window item {part!r}; expected qK:lo-hi")
        q, lo, hi = (int(g) for g in m.groups())
        if q not in ROWS:
            raise UsageError(f"window row q{q} outside 0..2")
        if lo > hi:
            raise UsageError(f"empty window interval {part!r}")
        if q in out:
            raise UsageError(f"row q{q} given twice in window")
        out[q] = (lo, hi)
    return out


def format_window(window: dict | None) -> str | None:
    if window is None:
        return None
    return ",".join(f"q{q}:{lo}-{hi}" for q, (lo, hi) in sorted(window.items()))


@dataclass(frozen=True)
class MapJob:
    """One rank computation: the matrix of d_{p,q} at canonical multidegree a."""

    side: str  # "primal" or "dual"
    p: int
    q: int
    a: tuple
    rows: int
    cols: int

    @property
    def id(self) -> str:
        name = matrix_name(self.p, self.q, self.a)
        return name if self.side == "primal" else "dual_" + name

    @property
    def nnz(self) -> int:
        return self.p * self.cols

    @property
    def cost(self) -> int:
        return self.rows * self.cols * min(self.rows, self.cols)

    def sort_key(self):
        return (self.side != "primal", self.p, self.q, self.a)


@dataclass
class StrandRecipe:
    """How each position on one strand multidegree gets its value."""

    n: int
    a: tuple
    kinds: dict  # q -> "zero" | "direct" | "dual" | "forced" | "pair"
    jobs: dict = field(default_factory=dict)  # q -> (out job id | None, in job id | None)
    positions: dict = field(default_factory=dict)  # q -> p, positions with positive dimension


@dataclass
class RangePlan:
    spec: EmbeddingSpec
    mode: str
    window: dict | None
    dual_assist: bool
    jobs: list
    recipes: list

    @property
    def total_jobs(self) -> int:
        return len(self.jobs)

    @property
    def pairs(self) -> list:
        return sorted({(j.side, j.p, j.q) for j in self.jobs}, key=lambda t: (t[0] != "primal", t[1], t[2]))

    def multidegrees(self) -> dict:
        out: dict = {}
        for j in self.jobs:
            out.setdefault((j.side, j.p, j.q), []).append(j.a)
        return out

    def job_ids(self) -> set:
        return {j.id for j in self.jobs}

    def largest(self):
        if not self.jobs:
            return None
        return max(self.jobs, key=lambda j: (j.cost, j.rows * j.cols, j.sort_key()))

    def summary(self) -> dict:
        big = self.largest()
        return {
            "mode": self.mode,
            "window": format_window(self.window),
            "dual_assist": self.dual_assist,
            "total_jobs": self.total_jobs,
            "pairs": [[s, p, q, len(v)] for (s, p, q), v in sorted(self.multidegrees().items(), key=lambda kv: (kv[0][0] != "primal", kv[0][1], kv[0][2]))],
            "largest": None if big is None else {"id": big.id, "rows": big.rows, "cols": big.cols, "nnz": big.nnz},
        }


def _max_strand(spec: EmbeddingSpec) -> int:
    # K_{p,q} = 0 for p > N; rows stop at q = 2
    return spec.N + 2


def _positions(spec: EmbeddingSpec, n: int, a) -> dict:
    """q -> p for row positions on strand n with positive strand dimension."""
    out = {}
    for q in ROWS:
        p = n - q
        if 0 <= p <= spec.N and strand_dimension(spec, p, q, a) > 0:
            out[q] = p
    return out


def _hint_zero(spec: EmbeddingSpec, p: int, q: int) -> bool:
    dual = koszul_dual_spec(spec).dual_spec
    if q == 0 and p >= h0(spec.b):
        return True
    if q == 2 and spec.codim - p >= h0(dual.b):
        return True
    if p == 0 and q >= 1:
        e = ((q - 1) * spec.d1 + spec.b1, (q - 1) * spec.d2 + spec.b2)
        if e[0] >= 0 and e[1] >= 0:
            return True
    if p == spec.codim and q <= 1:
        qd = 2 - q
        e = ((qd - 1) * spec.d1 + dual.b1, (qd - 1) * spec.d2 + dual.b2)
        if e[0] >= 0 and e[1] >= 0:
            return True
    return False


def _map_job(spec: EmbeddingSpec, side: str, p: int, q: int, a) -> MapJob | None:
    """The job for d_{p,q} at a, or None when source or target is zero."""
    if p < 1 or q < 0:
        return None
    cols = strand_dimension(spec, p, q, a)
    if cols == 0:
        return None
    rows = strand_dimension(spec, p - 1, q + 1, a)
    if rows == 0:
        return None
    return MapJob(side, p, q, tuple(a), rows, cols)


def direct_jobs(spec: EmbeddingSpec, p: int, q: int, a, side: str = "primal"):
    """(out job, in job) needed to read K_{p,q,a} off ranks (either may be None)."""
    return _map_job(spec, side, p, q, a), _map_job(spec, side, p + 1, q - 1, a)


def dual_position(spec: EmbeddingSpec, p: int, q: int, a):
    """(dual spec, p', q', canonical a') carrying the same Koszul group."""
    dm = koszul_dual_spec(spec)
    if dm.alpha is None:
        return None
    w = dm.weight(a)
    if min(w) < 0:
        return None
    pp, qq = dm.index_map(p, q)
    return dm.dual_spec, pp, qq, canonical_multidegree(w)[0]


def _route_cost(jobs) -> int:
    return sum(j.cost for j in jobs if j is not None)


def _window_kinds(spec, n, a, pos: dict, window: dict):
    """Statuses for the window mode; returns (kinds, unknown list)."""
    inwin = {q for q, p in pos.items() if q in window and window[q][0] <= p <= window[q][1]}
    kinds = {}
    iso = []
    for q in sorted(pos):
        if q in inwin:
            continue
        if (q - 1) in inwin or (q + 1) in inwin:
            kinds[q] = "zero"
        else:
            iso.append(q)
    unknown = sorted(inwin)
    iso_adjacent = any(b - a_ == 1 for a_, b in zip(iso, iso[1:]))
    if not iso:
        pass
    elif len(iso) == 1 or not iso_adjacent:
        unknown = sorted(unknown + iso)
    elif len(iso) == 2:
        if unknown:
            # the pair is settled after every window position is read directly
            for q in unknown:
                kinds[q] = "direct"
            for q in iso:
                kinds[q] = "pair"
            return kinds, []
        for q in iso:
            kinds[q] = "pair"
        return kinds, []
    else:
        # three consecutive isolated positions: (K0=0 or K1=0) and (K1=0 or K2=0)
        E = euler_characteristic(spec, a)
        s1 = (-1) ** pos[1]
        if E * s1 > 0 or E == 0:
            kinds.update({0: "zero", 1: "forced", 2: "zero"})
            return kinds, []
        kinds.update({0: "direct", 1: "zero", 2: "forced"})
        return kinds, []
    return kinds, unknown


def relevant_range(
    spec: EmbeddingSpec,
    override_window: dict | None = None,
    hints: bool = False,
    dual_assist: bool = False,
) -> RangePlan:
    """Plan the rank jobs for ``spec``.

    ``override_window`` switches to the window mode; ``hints`` applies the
    vanishing statements listed in the module docstring.
    """
    if override_window is not None:
        mode = "window+hints" if hints else "window"
    elif hints:
        mode = "hints"
    else:
        mode = "default"
    jobs: dict = {}
    recipes = []
    for n in range(0, _max_strand(spec) + 1):
        for a in canonical_strands(spec, n):
            pos = _positions(spec, n, a)
            if not pos:
                continue
            if mode.startswith("window"):
                hinted = {q for q, p in pos.items() if hints and _hint_zero(spec, p, q)}
                live = {q: p for q, p in pos.items() if q not in hinted}
                kinds, unknown = _window_kinds(spec, n, a, live, override_window)
                kinds.update({q: "zero" for q in hinted})
            else:
                kinds = {}
                unknown = []
                for q, p in pos.items():
                    if mode == "hints" and _hint_zero(spec, p, q):
                        kinds[q] = "zero"
                    else:
                        unknown.append(q)
            recipe = StrandRecipe(n, a, kinds, positions=pos)
            if unknown:
                _assign(spec, n, a, pos, unknown, recipe, dual_assist)
            for q, kind in recipe.kinds.items():
                if kind in ("direct", "dual"):
                    if q not in recipe.jobs:
                        recipe.jobs[q] = _jobs_for(spec, pos[q], q, a, kind)
            for q, pair in list(recipe.jobs.items()):
                for j in pair:
                    if j is not None:
                        jobs[j.id] = j
                recipe.jobs[q] = tuple(None if j is None else j.id for j in pair)
            recipes.append(recipe)
    ordered = sorted(jobs.values(), key=MapJob.sort_key)
    return RangePlan(spec, mode, override_window, dual_assist, ordered, recipes)


def _jobs_for(spec, p, q, a, kind):
    if kind == "direct":
        return direct_jobs(spec, p, q, a)
    dspec, pp, qq, aa = dual_position(spec, p, q, a)
    return direct_jobs(dspec, pp, qq, aa, side="dual")


def _assign(spec, n, a, pos, unknown, recipe, dual_assist):
    if len(unknown) == 1:
        recipe.kinds[unknown[0]] = "forced"
        return
    if not dual_assist:
        *direct, last = sorted(unknown)
        for q in direct:
            recipe.kinds[q] = "direct"
        recipe.kinds[last] = "forced"
        return
    routes = {}
    for q in unknown:
        p = pos[q]
        prim = direct_jobs(spec, p, q, a)
        best = ("direct", prim, _route_cost(prim))
        dp = dual_position(spec, p, q, a)
        if dp is not None:
            dual = direct_jobs(dp[0], dp[1], dp[2], dp[3], side="dual")
            c = _route_cost(dual)
            if c < best[2]:
                best = ("dual", dual, c)
        routes[q] = best
    # force the most expensive position; ties force the highest q
    forced = max(unknown, key=lambda q: (routes[q][2], q))
    for q in unknown:
        if q == forced:
            recipe.kinds[q] = "forced"
        else:
            recipe.kinds[q] = routes[q][0]
            recipe.jobs[q] = routes[q][1]


def compare_plans(window_plan: RangePlan, default_plan: RangePlan) -> dict:
    """Counts of both plans and whether the default job set contains the window one."""
    w = window_plan.job_ids()
    d = default_plan.job_ids()
    return {
        "window_jobs": len(w),
        "default_jobs": len(d),
        "default_is_superset": w <= d,
        "missing_from_default": sorted(w - d)[:10],
    }


def window_from_rows(rows: dict) -> dict:
    """Relevant-range window read off a known graded table.

    ``rows`` maps q to the list of dim K_{p,q} indexed by p.  A position is
    relevant when it is nonzero and a neighbour on its strand is nonzero.
    """

    def val(p, q):
        r = rows.get(q, [])
        return r[p] if 0 <= p < len(r) else 0

    window = {}
    for q in ROWS:
        ps = [
            p
            for p in range(len(rows.get(q, [])))
            if val(p, q) and (val(p - 1, q + 1) or val(p + 1, q - 1))
        ]
        if ps:
            window[q] = (min(ps), max(ps))
    return window
