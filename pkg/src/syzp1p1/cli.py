"""Command-line driver: plan, build, rank, assemble, schur, bs, verify, report.

Exit status: 0 on success, 1 on integrity or resource failures, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

from . import __version__
from . import orchestrator as orch
from .betti import (
    check_duality,
    check_hilbert,
    check_multigraded_duality,
    render_m2,
    render_table,
    table_from_json,
    table_to_json,
)
from .bs import BSDecomposition, bs_decompose, columns_from_graded, normalize_coefficients
from .conjectures import conjecture_suite
from .errors import FormatError, IntegrityError, ResourceError, SyzygyError, UsageError
from .grading import DEFAULT_MODULUS, EmbeddingSpec, koszul_dual_spec
from .planning import compare_plans, parse_window, relevant_range
from .reports import bs_coeffs_csv, row_distribution, schur_counts_csv
from .schur import decompose_table, decomps_from_json, decomps_to_json, redundancy_report, render_text
from .strands import _atomic_write_text, compose_check

log = logging.getLogger("syzp1p1")

SIZE_UNITS = {"": 1, "K": 2**10, "M": 2**20, "G": 2**30, "T": 2**40}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_size(text: str) -> int:
    t = text.strip().upper().removesuffix("B").removesuffix("I")
    unit = t[-1:] if t[-1:] in SIZE_UNITS and t[-1:] else ""
    try:
        val = float(t[: len(t) - len(unit)] if unit else t)
    except ValueError:
        raise UsageError(f"bad size {text!r}") from None
    return int(val * SIZE_UNITS[unit])


def parse_tiers(text: str) -> list:
    return [parse_size(x) for x in text.split(",") if x.strip()]


# ------------------------------------------------------------------ run context

class Run:
    """Spec, planner flags and the run directory shared by all subcommands."""

    def __init__(self, args):
        self.spec = EmbeddingSpec(args.d1, args.d2, args.b1, args.b2, args.prime)
        self.window = parse_window(args.window)
        self.hints = args.hints if args.hints is not None else self.window is not None
        self.dual_assist = args.dual_assist
        self.manifest = orch.plan(self.spec, self.window, self.hints, self.dual_assist)
        if args.run:
            self.dir = args.run
        else:
            root = args.runs_root or os.environ.get("SYZ_RUNS", "runs")
            self.dir = os.path.join(root, self.manifest.spec_hash[:16])
        os.makedirs(self.dir, exist_ok=True)

    def path(self, *parts) -> str:
        return os.path.join(self.dir, *parts)

    def loaded_manifest(self):
        orch.write_manifest(self.manifest, self.dir)
        return orch.load_manifest(self.dir, self.spec.modulus)

    def table(self):
        """Assembled multigraded table (from betti.json when current, else from the store)."""
        path = self.path("betti.json")
        if os.path.exists(path):
            with open(path) as fh:
                mt = table_from_json(fh.read())
            if mt.spec == self.spec:
                return mt
        return assemble_run(self)


def assemble_run(run: Run):
    from .betti import assemble

    man = run.loaded_manifest()
    store = orch.open_store(man, run.dir)
    missing = [j.id for j in man.jobs if j.id not in store.done()]
    if missing:
        raise IntegrityError(f"{len(missing)} jobs lack ranks (first: {missing[0]}); run 'rank' first")
    return assemble(man.plan(run.spec), store.ranks())


def write_text(path: str, text: str) -> None:
    if os.path.exists(path):
        with open(path) as fh:
            if fh.read() == text:
                return
    _atomic_write_text(path, lambda fh: fh.write(text))


# ------------------------------------------------------------------ subcommands

def cmd_plan(run: Run, args) -> int:
    orch.write_manifest(run.manifest, run.dir)
    s = run.manifest.summary
    print(f"spec {run.spec.label()} mode {s['mode']} window {s['window']} dual_assist {s['dual_assist']}")
    print(f"total jobs: {s['total_jobs']}")
    if s["largest"]:
        b = s["largest"]
        print(f"largest matrix: {b['id']} {b['rows']} x {b['cols']} ({b['nnz']} nonzeros)")
    for side, p, q, n in s["pairs"]:
        print(f"  {side} d_{{{p},{q}}}: {n} multidegrees")
    if args.compare_default and run.window is not None:
        default = relevant_range(run.spec)
        cmp = compare_plans(relevant_range(run.spec, run.window, hints=run.hints, dual_assist=run.dual_assist), default)
        sup = "yes" if cmp["default_is_superset"] else "NO"
        print(f"default window: {cmp['default_jobs']} jobs; superset of the window plan: {sup}")
        if not cmp["default_is_superset"]:
            print(f"window jobs missing from the default plan: {len(cmp['missing_from_default'])}")
    print(f"manifest: {run.path('manifest.json')}")
    return 0


def cmd_build(run: Run, args) -> int:
    man = run.loaded_manifest()
    n = orch.build(man, run.dir)
    print(f"matrices written: {n} (of {len(man.jobs)}) in {run.path('matrices')}")
    return 0


def _progress(done, total):
    if done == total or done % max(1, total // 20) == 0:
        print(f"  {done}/{total} jobs", file=sys.stderr)


def cmd_rank(run: Run, args) -> int:
    man = run.loaded_manifest()
    tiers = parse_tiers(args.tiers)
    if args.enqueue:
        print(f"tickets enqueued: {orch.enqueue(man, run.dir, tiers)}")
        return 0
    if args.worker:
        print(f"jobs processed: {orch.work(run.dir, args.max_jobs, args.strategy)}")
        return 0
    if args.collect:
        print(json.dumps(orch.collect(man, run.dir), sort_keys=True))
        store = orch.open_store(man, run.dir)
    else:
        store = orch.execute(man, run.dir, workers=args.workers, tiers=tiers, strategy=args.strategy, progress=_progress)
    done, failed = store.done(), store.failed()
    print(f"done {len(done)} / {len(man.jobs)}; failed {len(failed)}")
    for jid, rec in sorted(failed.items()):
        print(f"  failed {jid}: {rec['reason']}")
    status = 1 if failed and not args.collect else 0
    if args.second_prime is not None and done:
        rep = orch.second_prime_check(man, store, rate=args.second_prime, prime=args.second_prime_modulus)
        write_text(run.path("second_prime.json"), json.dumps(rep, indent=1, sort_keys=True) + "\n")
        print(f"second prime {rep['prime']}: {rep['sampled']} sampled, {len(rep['disagreements'])} disagreements")
        if rep["disagreements"]:
            status = 1
    return status


def cmd_assemble(run: Run, args) -> int:
    mt = assemble_run(run)
    hil = check_hilbert(mt)
    write_text(run.path("betti.json"), table_to_json(mt))
    write_text(run.path("betti.m2"), render_m2(mt.collapse()))
    sys.stdout.write(render_table(mt, args.format))
    if not hil["ok"]:
        print(f"Hilbert identity fails at {hil['signed_mismatches']} multidegrees", file=sys.stderr)
        return 1
    return 0


def cmd_schur(run: Run, args) -> int:
    decomps = decompose_table(run.table())
    write_text(run.path("schur.json"), decomps_to_json(decomps))
    sys.stdout.write(render_text(decomps))
    red = redundancy_report(decomps)
    print(f"redundant Schur functors: {red['redundant']} of {red['total']} ({red['redundant_pairs']} adjacent pairs)")
    return 0


def cmd_bs(run: Run, args) -> int:
    g = run.table().collapse()
    dec = bs_decompose(columns_from_graded(g))
    if dec.reconstruct(run.spec.codim + 1) != [dict(c) for c in columns_from_graded(g)]:
        raise IntegrityError("Boij-Soederberg reconstruction differs from the input table")
    write_text(run.path("bs.json"), dec.to_json())
    for delta, c in dec.terms:
        print(f"{c} * pi{tuple(delta)}")
    if run.spec.b == (0, 0):
        n = normalize_coefficients(dec, run.spec)
        print(f"sum of normalized coefficients: {n['sum']}")
        print(f"  formula as printed: {n['formula_as_printed']} ({'match' if n['matches_as_printed'] else 'mismatch'})")
        print(f"  falling-factorial reading: {n['formula_falling']} ({'match' if n['matches_falling'] else 'mismatch'})")
    return 0


def _dual_table(run: Run, args):
    """Assembled table of the Koszul-dual spec, from --dual-run or computed in scratch space."""
    dual = koszul_dual_spec(run.spec)
    if args.dual_run:
        with open(os.path.join(args.dual_run, "betti.json")) as fh:
            mt = table_from_json(fh.read())
        if mt.spec.key() != dual.dual_spec.key():
            raise UsageError(f"{args.dual_run} holds {mt.spec.label()}, expected {dual.dual_spec.label()}")
        return dual, mt
    from .betti import assemble

    man = orch.plan(dual.dual_spec)
    d = tempfile.mkdtemp(prefix="syz-dual-")
    orch.write_manifest(man, d)
    store = orch.execute(man, d, workers=args.workers)
    if store.failed():
        raise ResourceError(f"dual run failed for {len(store.failed())} jobs")
    return dual, assemble(man.plan(), store.ranks())


def cmd_verify(run: Run, args) -> int:
    modes = args.mode or ["hilbert", "duality", "compose"]
    ok = True
    for mode in modes:
        if mode == "hilbert":
            hil = check_hilbert(run.table())
            print(f"hilbert: {'pass' if hil['ok'] else 'FAIL'} ({hil['multidegrees']} multidegrees, {hil['signed_mismatches']} mismatches)")
            ok &= hil["ok"]
        elif mode == "duality":
            mt = run.table()
            dual, other = _dual_table(run, args)
            bad = check_duality(mt.collapse(), other.collapse(), dual)
            multi = check_multigraded_duality(mt, other, dual) if dual.alpha is not None else []
            passed = not bad and not multi
            print(f"duality with {dual.dual_spec.label()}: {'pass' if passed else 'FAIL'} ({len(bad)} graded, {len(multi)} multigraded mismatches)")
            for p, q, vb, va in bad[:10]:
                print(f"  K_{{{p},{q}}}: {vb} vs rotated {va}")
            ok &= passed
        elif mode == "compose":
            man = run.manifest
            checked = failed = 0
            for job in man.jobs:
                if job.p < 2:
                    continue
                spec = job.spec_for(run.spec)
                checked += 1
                if not compose_check(spec, job.p, job.q, job.a):
                    failed += 1
                    print(f"  d o d != 0 through {job.id}")
            print(f"compose: {'pass' if not failed else 'FAIL'} ({checked} strands checked)")
            ok &= not failed
    return 0 if ok else 1


def cmd_report(run: Run, args) -> int:
    mt = run.table()
    g = mt.collapse()
    decomps = None
    if os.path.exists(run.path("schur.json")):
        with open(run.path("schur.json")) as fh:
            decomps = decomps_from_json(fh.read())
    else:
        decomps = decompose_table(mt)
    dec = None
    if os.path.exists(run.path("bs.json")):
        with open(run.path("bs.json")) as fh:
            dec = BSDecomposition.from_json(fh.read())
    out = run.path("reports")
    os.makedirs(out, exist_ok=True)
    for q in (0, 1, 2):
        prof = row_distribution(g, q)
        if prof.ps:
            write_text(os.path.join(out, f"row_profile_q{q}.csv"), prof.to_csv())
    write_text(os.path.join(out, "schur_counts.csv"), schur_counts_csv(decomps))
    suite = conjecture_suite(run.spec, g, decomps, dec)
    if dec is None:
        try:
            dec = bs_decompose(columns_from_graded(g))
        except IntegrityError:
            dec = None
    if dec is not None:
        write_text(os.path.join(out, "bs_coeffs.csv"), bs_coeffs_csv(dec, run.spec))
    write_text(os.path.join(out, "conjectures.json"), json.dumps(suite, indent=1, sort_keys=True, default=str) + "\n")
    for item in suite:
        extra = ""
        if item.get("violation_p"):
            extra = f" violation at p={item['violation_p']}"
        print(f"{item['conjecture']}: {item['status']}{extra}")
    print(f"reports: {out}")
    return 0


COMMANDS = {
    "plan": cmd_plan,
    "build": cmd_build,
    "rank": cmd_rank,
    "assemble": cmd_assemble,
    "schur": cmd_schur,
    "bs": cmd_bs,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("spec")
    g.add_argument("--d1", type=int, required=True)
    g.add_argument("--d2", type=int, required=True)
    g.add_argument("--b1", type=int, default=0)
    g.add_argument("--b2", type=int, default=0)
    g.add_argument("--prime", type=int, default=DEFAULT_MODULUS, help="field characteristic (default %(default)s)")
    g = common.add_argument_group("planning")
    g.add_argument("--window", help='per-row p-range override, e.g. "q0:4-8,q1:3-7"')
    g.add_argument("--hints", dest="hints", action="store_true", default=None, help="drop positions known to vanish (default with --window)")
    g.add_argument("--no-hints", dest="hints", action="store_false")
    g.add_argument("--dual-assist", action="store_true", help="route rank work to the Koszul-dual spec when cheaper")
    g = common.add_argument_group("run directory")
    g.add_argument("--run", help="run directory (default: <runs-root>/<spec hash>)")
    g.add_argument("--runs-root", help="parent of keyed run directories (default $SYZ_RUNS or ./runs)")
    g.add_argument("-v", "--verbose", action="store_true")

    ap = _Parser(prog="syz", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"syzp1p1 {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("plan", parents=[common], help="write manifest.json")
    p.add_argument("--compare-default", action="store_true", help="with --window, compare against the default plan")
    sub.add_parser("build", parents=[common], help="write strand matrices as SMF files")
    p = sub.add_parser("rank", parents=[common], help="compute or resume ranks")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tiers", default="2G,8G,32G,128G", help="memory tiers, ascending (default %(default)s)")
    p.add_argument("--strategy", choices=["auto", "sparse-elim", "dense"], default="auto")
    p.add_argument("--second-prime", type=float, nargs="?", const=0.05, default=None, metavar="RATE",
                   help="recheck a sample of ranks at another prime (default rate 0.05)")
    p.add_argument("--second-prime-modulus", type=int, default=orch.SECOND_PRIME)
    x = p.add_mutually_exclusive_group()
    x.add_argument("--enqueue", action="store_true", help="write tickets for external workers")
    x.add_argument("--worker", action="store_true", help="act as an external worker on the queue")
    x.add_argument("--collect", action="store_true", help="fold external results into results.jsonl")
    p.add_argument("--max-jobs", type=int, default=None)
    p = sub.add_parser("assemble", parents=[common], help="write betti.json and betti.m2")
    p.add_argument("--format", choices=["m2", "json", "csv"], default="m2")
    sub.add_parser("schur", parents=[common], help="write schur.json")
    sub.add_parser("bs", parents=[common], help="write bs.json")
    p = sub.add_parser("verify", parents=[common], help="duality, Hilbert and d o d = 0 checks")
    p.add_argument("--mode", action="append", choices=["duality", "hilbert", "compose"])
    p.add_argument("--dual-run", help="run directory of the dual spec holding betti.json")
    p.add_argument("--workers", type=int, default=1)
    sub.add_parser("report", parents=[common], help="CSV bundle and conjecture report")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"syz: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    scratch = os.environ.get("SYZ_TMPDIR")
    saved = tempfile.tempdir
    if scratch:
        os.makedirs(scratch, exist_ok=True)
        tempfile.tempdir = scratch
    try:
        run = Run(args)
        return COMMANDS[args.command](run, args)
    except UsageError as exc:
        print(f"syz: usage error: {exc}", file=sys.stderr)
        return 2
    except (IntegrityError, FormatError, ResourceError) as exc:
        print(f"syz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except SyzygyError as exc:
        print(f"syz: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"syz: {exc}", file=sys.stderr)
        return 1
    finally:
        tempfile.tempdir = saved


if __name__ == "__main__":
    sys.exit(main())
