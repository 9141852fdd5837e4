"""Job manifests, the result store, tiered execution and the file-based worker protocol.

Run directory layout::

    <out>/manifest.json      plan and job list (no modulus: identical across primes)
    <out>/matrices/*.smf     strand matrices, written by ``build``
    <out>/results.jsonl      append-only log of finished jobs
    <out>/queue, claimed, done   external-worker exchange directories
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import IntegrityError, ResourceError, UsageError
from .fflinalg import memory_estimate, sparse_rank
from .grading import EmbeddingSpec, koszul_dual_spec
from .planning import MapJob, RangePlan, format_window, parse_window, relevant_range
from .strands import _atomic_write_text, build_strand_matrix, read_smf, write_smf

log = logging.getLogger(__name__)

GiB = 2**30
DEFAULT_TIERS = (2 * GiB, 8 * GiB, 32 * GiB, 128 * GiB)
SECOND_PRIME = 32009


@dataclass
class JobRecord:
    id: str
    side: str
    p: int
    q: int
    a: tuple
    rows: int
    cols: int
    nnz: int
    matrix: str
    status: str = "pending"
    tier: int | None = None
    result: dict | None = None
    reason: str | None = None

    @property
    def estimate(self) -> int:
        return memory_estimate(self.rows, self.cols, self.nnz)

    def spec_for(self, spec: EmbeddingSpec) -> EmbeddingSpec:
        return spec if self.side == "primal" else koszul_dual_spec(spec).dual_spec


@dataclass
class JobManifest:
    spec: EmbeddingSpec
    window: dict | None
    hints: bool
    dual_assist: bool
    jobs: list
    summary: dict = field(default_factory=dict)

    @property
    def plan_args(self) -> dict:
        return {"window": format_window(self.window), "hints": self.hints, "dual_assist": self.dual_assist}

    @property
    def spec_hash(self) -> str:
        return self.spec.spec_hash(self.plan_args)

    def plan(self, spec: EmbeddingSpec | None = None) -> RangePlan:
        return relevant_range(spec or self.spec, self.window, hints=self.hints, dual_assist=self.dual_assist)

    def to_json(self) -> str:
        doc = {
            "format": "syz-manifest 1",
            "generator": f"syzp1p1 {__version__}",
            "spec": self.spec.key(),
            "spec_hash": self.spec_hash,
            "plan": {**self.plan_args, **self.summary},
            "jobs": [
                {k: (list(v) if k == "a" else v) for k, v in asdict(j).items() if k not in ("status", "tier", "result", "reason")}
                for j in self.jobs
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, modulus: int) -> "JobManifest":
        doc = json.loads(text)
        s = doc["spec"]
        spec = EmbeddingSpec(s["d1"], s["d2"], s["b1"], s["b2"], modulus)
        pl = doc["plan"]
        jobs = [JobRecord(**{**j, "a": tuple(j["a"])}) for j in doc["jobs"]]
        man = cls(spec, parse_window(pl["window"]), pl["hints"], pl["dual_assist"], jobs)
        man.summary = {k: v for k, v in pl.items() if k not in ("window", "hints", "dual_assist")}
        if man.spec_hash != doc["spec_hash"]:
            raise IntegrityError("manifest spec hash does not match its contents")
        return man


def _record(job: MapJob) -> JobRecord:
    return JobRecord(job.id, job.side, job.p, job.q, tuple(job.a), job.rows, job.cols, job.nnz, f"matrices/{job.id}.smf")


def plan(spec: EmbeddingSpec, window: dict | None = None, hints: bool = False, dual_assist: bool = False) -> JobManifest:
    """Manifest with one job per canonical matrix, ordered by side, p, q, then multidegree."""
    rp = relevant_range(spec, window, hints=hints, dual_assist=dual_assist)
    man = JobManifest(spec, window, hints, dual_assist, [_record(j) for j in rp.jobs])
    man.summary = rp.summary()
    return man


def write_manifest(man: JobManifest, out: str) -> str:
    path = os.path.join(out, "manifest.json")
    text = man.to_json()
    if os.path.exists(path):
        with open(path) as fh:
            if fh.read() == text:
                return path
    _atomic_write_text(path, lambda fh: fh.write(text))
    return path


def load_manifest(out: str, modulus: int) -> JobManifest:
    path = os.path.join(out, "manifest.json")
    if not os.path.exists(path):
        raise UsageError(f"no manifest at {path}; run plan first")
    with open(path) as fh:
        return JobManifest.from_json(fh.read(), modulus)


# ------------------------------------------------------------------ result store

class ResultStore:
    """Append-only JSON-lines log; a done record is never replaced."""

    def __init__(self, path: str, spec_hash: str, modulus: int):
        self.path = path
        self.spec_hash = spec_hash
        self.modulus = modulus
        self.records: dict = {}
        if os.path.exists(path):
            with open(path) as fh:
                for n, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    if rec.get("spec_hash") != spec_hash:
                        raise IntegrityError(f"{path}:{n}: spec hash mismatch; refusing to resume")
                    if rec.get("modulus") != modulus:
                        raise IntegrityError(f"{path}:{n}: results were computed modulo {rec.get('modulus')}, not {modulus}")
                    self._keep(rec)

    def _keep(self, rec: dict) -> None:
        old = self.records.get(rec["id"])
        if old is not None and old["status"] == "done":
            if rec["status"] == "done" and rec["rank"] != old["rank"]:
                raise IntegrityError(f"conflicting ranks for {rec['id']}: {old['rank']} vs {rec['rank']}")
            return
        self.records[rec["id"]] = rec

    def append(self, rec: dict) -> None:
        rec = {**rec, "spec_hash": self.spec_hash, "modulus": self.modulus}
        old = self.records.get(rec["id"])
        if old is not None and old["status"] == "done":
            return
        os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
        with open(self.path, "a") as fh:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._keep(rec)

    def done(self) -> dict:
        return {k: v for k, v in self.records.items() if v["status"] == "done"}

    def ranks(self) -> dict:
        return {k: v["rank"] for k, v in self.done().items()}

    def failed(self) -> dict:
        return {k: v for k, v in self.records.items() if v["status"] == "failed"}


def open_store(man: JobManifest, out: str) -> ResultStore:
    return ResultStore(os.path.join(out, "results.jsonl"), man.spec_hash, man.spec.modulus)


# ------------------------------------------------------------------ matrices

def _smf_header(spec: EmbeddingSpec, job: JobRecord) -> str:
    a = job.a
    return (
        "SMF 1\n"
        f"modulus {spec.modulus}\n"
        f"spec {spec.d1} {spec.d2} {spec.b1} {spec.b2}\n"
        f"strand {job.p} {job.q}\n"
        f"multidegree {a[0]} {a[1]} {a[2]} {a[3]}\n"
        f"size {job.rows} {job.cols} {job.nnz}\n"
    )


def _smf_matches(path: str, spec: EmbeddingSpec, job: JobRecord) -> bool:
    if not os.path.exists(path):
        return False
    with open(path) as fh:
        head = "".join(fh.readline() for _ in range(6))
    return head == _smf_header(spec, job)


def build(man: JobManifest, out: str, only: set | None = None) -> int:
    """Write SMF files for the manifest's jobs; existing files with the right header are kept."""
    written = 0
    for job in man.jobs:
        if only is not None and job.id not in only:
            continue
        spec = job.spec_for(man.spec)
        path = os.path.join(out, job.matrix)
        if _smf_matches(path, spec, job):
            continue
        m = build_strand_matrix(spec, job.p, job.q, job.a)
        if (m.rows, m.cols, m.nnz) != (job.rows, job.cols, job.nnz):
            raise IntegrityError(f"{job.id}: built size {m.rows}x{m.cols}/{m.nnz} differs from the plan")
        write_smf(m, path)
        written += 1
    return written


# ------------------------------------------------------------------ execution

def _spec_tuple(spec: EmbeddingSpec) -> tuple:
    return (spec.d1, spec.d2, spec.b1, spec.b2, spec.modulus)


def run_job(spec_t: tuple, job: dict, budget: int, smf_path: str | None, strategy: str) -> dict:
    """Worker entry point: compute one rank under a memory budget; never raises."""
    t0 = time.perf_counter()
    try:
        est = memory_estimate(job["rows"], job["cols"], job["nnz"])
        if est > budget:
            raise ResourceError(f"estimate {est} exceeds tier {budget}", estimate=est)
        spec = EmbeddingSpec(*spec_t)
        if smf_path and os.path.exists(smf_path):
            m = read_smf(smf_path)
            if m.modulus != spec.modulus:
                m = build_strand_matrix(spec, job["p"], job["q"], tuple(job["a"]))
        else:
            m = build_strand_matrix(spec, job["p"], job["q"], tuple(job["a"]))
        rep = sparse_rank(m, strategy=strategy, budget=budget, matrix_id=job["id"])
        nonzero_rows = int(np.unique(m.r).size)
        return {"ok": True, **rep.to_json(), "effective_rows": nonzero_rows, "elapsed_s": time.perf_counter() - t0}
    except ResourceError as exc:
        return {"ok": False, "kind": "memory", "estimate": exc.estimate, "message": str(exc)}
    except Exception as exc:  # recorded as a failed job, the coordinator keeps going
        return {"ok": False, "kind": "error", "message": f"{type(exc).__name__}: {exc}"}


def _job_dict(job: JobRecord) -> dict:
    return {"id": job.id, "p": job.p, "q": job.q, "a": list(job.a), "rows": job.rows, "cols": job.cols, "nnz": job.nnz}


def _done_record(job: JobRecord, res: dict, tier: int, tiers) -> dict:
    return {
        "id": job.id,
        "status": "done",
        "rank": res["rank"],
        "elapsed_s": round(res["elapsed_s"], 6),
        "peak_bytes": res["peak_bytes"],
        "strategy": res["strategy"],
        "tier": tier,
        "tier_bytes": tiers[tier],
        "rows": job.rows,
        "cols": job.cols,
        "effective_rows": res.get("effective_rows"),
    }


def _failed_record(job: JobRecord, res: dict, tier: int, tiers) -> dict:
    return {"id": job.id, "status": "failed", "tier": tier, "tier_bytes": tiers[tier], "reason": res["message"]}


def _check_tiers(tiers) -> list:
    tiers = [int(t) for t in tiers]
    if not tiers or any(b <= a for a, b in zip(tiers, tiers[1:])) or tiers[0] <= 0:
        raise UsageError("memory tiers must be a nonempty, strictly ascending list of positive byte counts")
    return tiers


def execute(
    man: JobManifest,
    out: str,
    workers: int = 1,
    tiers=DEFAULT_TIERS,
    strategy: str = "auto",
    progress=None,
) -> ResultStore:
    """Run every job that is not done yet; memory failures move up the tier ladder."""
    tiers = _check_tiers(tiers)
    store = open_store(man, out)
    done = store.done()
    pending = [j for j in man.jobs if j.id not in done]
    # largest estimated first within a tier
    queue = [(j, 0) for j in sorted(pending, key=lambda j: (-j.rows * j.cols * min(j.rows, j.cols), j.id))]
    spec_cache = {}

    def submit_args(job, tier):
        spec = spec_cache.setdefault(job.side, job.spec_for(man.spec))
        path = os.path.join(out, job.matrix)
        return (_spec_tuple(spec), _job_dict(job), tiers[tier], path, strategy)

    def settle(job, tier, res):
        if res["ok"]:
            store.append(_done_record(job, res, tier, tiers))
            return None
        if res["kind"] == "memory" and tier + 1 < len(tiers):
            log.info("%s: retry at tier %d (%s)", job.id, tier + 1, res["message"])
            return (job, tier + 1)
        store.append(_failed_record(job, res, tier, tiers))
        return None

    finished = 0
    if workers <= 1:
        while queue:
            job, tier = queue.pop(0)
            nxt = settle(job, tier, run_job(*submit_args(job, tier)))
            if nxt:
                queue.append(nxt)
            else:
                finished += 1
                if progress:
                    progress(finished, len(pending))
        return store
    with ProcessPoolExecutor(max_workers=workers) as pool:
        running = {}
        while queue or running:
            while queue and len(running) < 2 * workers:
                job, tier = queue.pop(0)
                running[pool.submit(run_job, *submit_args(job, tier))] = (job, tier)
            ready, _ = wait(running, return_when=FIRST_COMPLETED)
            for fut in sorted(ready, key=lambda f: running[f][0].id):
                job, tier = running.pop(fut)
                nxt = settle(job, tier, fut.result())
                if nxt:
                    queue.append(nxt)
                else:
                    finished += 1
                    if progress:
                        progress(finished, len(pending))
    return store


def resume(man: JobManifest, out: str, **kw) -> ResultStore:
    """``execute`` restricted to jobs without a done record (the store must match the manifest)."""
    return execute(man, out, **kw)


def second_prime_check(man: JobManifest, store: ResultStore, rate: float = 0.05, prime: int = SECOND_PRIME, seed: int = 0) -> dict:
    """Recompute a deterministic sample of done ranks over another prime and list disagreements."""
    if prime == man.spec.modulus:
        raise UsageError("second prime equals the run's modulus")
    done = store.done()
    ids = sorted(done)
    k = min(len(ids), math.ceil(rate * len(ids))) if rate > 0 else 0
    sample = sorted(random.Random(seed).sample(ids, k)) if k else []
    by_id = {j.id: j for j in man.jobs}
    alt = man.spec.with_modulus(prime)
    disagreements = []
    for jid in sample:
        job = by_id[jid]
        spec = job.spec_for(alt)
        r = sparse_rank(build_strand_matrix(spec, job.p, job.q, job.a)).rank
        if r != done[jid]["rank"]:
            disagreements.append({"id": jid, "rank": done[jid]["rank"], "rank_second_prime": r})
    return {"prime": prime, "sampled": len(sample), "ids": sample, "disagreements": disagreements}


# ------------------------------------------------------------------ external workers

def _dirs(out):
    return {k: os.path.join(out, k) for k in ("queue", "claimed", "done")}


def enqueue(man: JobManifest, out: str, tiers=DEFAULT_TIERS) -> int:
    """Write one ticket per job lacking a result into <out>/queue (and its SMF file)."""
    tiers = _check_tiers(tiers)
    store = open_store(man, out)
    d = _dirs(out)
    for path in d.values():
        os.makedirs(path, exist_ok=True)
    pending = [j for j in man.jobs if j.id not in store.done()]
    build(man, out, only={j.id for j in pending})
    n = 0
    for job in pending:
        if any(os.path.exists(os.path.join(p, job.id + ".json")) for p in d.values()):
            continue
        ticket = {**_job_dict(job), "tier": 0, "tiers": tiers, "matrix": job.matrix, "modulus": man.spec.modulus}
        _atomic_write_text(os.path.join(d["queue"], job.id + ".json"), lambda fh, t=ticket: json.dump(t, fh))
        n += 1
    return n


def work(out: str, max_jobs: int | None = None, strategy: str = "auto") -> int:
    """External worker loop: claim tickets by rename, compute, publish results into <out>/done."""
    d = _dirs(out)
    count = 0
    while max_jobs is None or count < max_jobs:
        names = sorted(os.listdir(d["queue"])) if os.path.isdir(d["queue"]) else []
        claimed = None
        for name in names:
            src = os.path.join(d["queue"], name)
            dst = os.path.join(d["claimed"], name)
            try:
                os.rename(src, dst)
            except FileNotFoundError:
                continue  # another worker won the race
            claimed = dst
            break
        if claimed is None:
            break
        with open(claimed) as fh:
            t = json.load(fh)
        path = os.path.join(out, t["matrix"])
        m = read_smf(path)
        spec_t = _spec_tuple(m.spec)
        res = run_job(spec_t, t, t["tiers"][t["tier"]], path, strategy)
        _atomic_write_text(os.path.join(d["done"], os.path.basename(claimed)), lambda fh: json.dump({**t, "result": res}, fh))
        os.unlink(claimed)
        count += 1
    return count


def collect(man: JobManifest, out: str) -> dict:
    """Fold published results into the store; memory failures are requeued one tier up."""
    d = _dirs(out)
    store = open_store(man, out)
    by_id = {j.id: j for j in man.jobs}
    stats = {"done": 0, "requeued": 0, "failed": 0}
    if not os.path.isdir(d["done"]):
        return stats
    for name in sorted(os.listdir(d["done"])):
        path = os.path.join(d["done"], name)
        with open(path) as fh:
            t = json.load(fh)
        job = by_id.get(t["id"])
        if job is None:
            raise IntegrityError(f"result {name} does not belong to this manifest")
        res, tier, tiers = t["result"], t["tier"], t["tiers"]
        if res["ok"]:
            store.append(_done_record(job, res, tier, tiers))
            stats["done"] += 1
        elif res["kind"] == "memory" and tier + 1 < len(tiers):
            t2 = {k: v for k, v in t.items() if k != "result"}
            t2["tier"] = tier + 1
            _atomic_write_text(os.path.join(d["queue"], name), lambda fh: json.dump(t2, fh))
            stats["requeued"] += 1
        else:
            store.append(_failed_record(job, res, tier, tiers))
            stats["failed"] += 1
        os.unlink(path)
    return stats
