"""Sweep pipeline: corpus -> reduction -> embedding -> (strategy x c x SRT)
grid -> sampling -> decoding -> per-cell CSV rows -> aggregate report.

All randomness is derived from the master seed by path (see ``seeds``), so a
row depends only on its (instance, strategy, c, srt_index) cell.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .annealer import BackendConfig, CapacityError, SaSchedule, sample
from .chimera import ChimeraSpec, EmbeddingError, build_chimera, greedy_embed
from .decode import DECODERS, accepted, decode_concert_batch
from .paramset import (
    ParamConfig,
    SrtMode,
    StrategyKind,
    apply_srt,
    compute_weights,
    parameterize,
    srt_set,
)
from .problem import Embedding, HardwareGraph, LogicalProblem, dump_json, load_json
from .sat import DEFAULT_CAP, CorpusEntry, CnfFormula, count_solutions, generate_mixed_sat, sat_to_ising
from .seeds import derive_seed

log = logging.getLogger(__name__)

DEFAULT_C_GRID = (1.6, 1.8, 2.0, 2.2, 2.4)
CSV_COLUMNS = (
    "instance_id",
    "n",
    "alpha",
    "solution_count",
    "strategy",
    "c",
    "h_min",
    "srt_index",
    "srt_mode",
    "backend",
    "seed",
    "reads",
    "success_probability",
    "unique_answers",
    "answer_fraction",
    "mpd",
    "scale",
    "logical_qubits",
    "physical_qubits",
    "max_chain_length",
    "broken_chain_fraction",
    "answers",
)
REPORT_SCHEMA_VERSION = 1

PRESETS = {
    "desk": {"n": [8, 10], "alpha": [10, 20], "chimera": (8, 8, 4), "dead": 0},
    "dw2-scale": {"n": [10, 20], "alpha": [10, 20, 30, 40, 50], "chimera": (8, 8, 4), "dead": 8},
    "dw2x-scale": {"n": [30], "alpha": [10, 20, 30, 40, 50], "chimera": (12, 12, 4), "dead": 54},
}


# --- corpus -----------------------------------------------------------------

def generate_corpus(
    ns,
    alphas,
    per_cell: int,
    master_seed: int,
    max_len: int = 3,
    cap: int = DEFAULT_CAP,
    max_attempts: int = 200,
) -> list[CorpusEntry]:
    """Satisfiable instances with fewer than ``cap`` solutions, ``per_cell`` per (n, alpha)."""
    out = []
    for n in ns:
        for alpha in alphas:
            kept = 0
            for t in range(max_attempts):
                if kept == per_cell:
                    break
                seed = derive_seed(master_seed, "gen", n, alpha, t)
                f = generate_mixed_sat(n, alpha, min(max_len, n), seed)
                res = count_solutions(f, cap)
                if res.capped or res.count == 0 or res.count >= cap:
                    continue
                out.append(CorpusEntry(f"n{n}_a{alpha}_{t:04d}", n, alpha, seed, res.count, False, min(max_len, n)))
                kept += 1
            if kept < per_cell:
                log.warning("only %d/%d instances for n=%d alpha=%d", kept, per_cell, n, alpha)
    return out


def write_manifest(entries, path) -> None:
    Path(path).write_text(json.dumps([e.to_json() for e in entries], indent=2) + "\n")


def read_manifest(path) -> list[CorpusEntry]:
    return [CorpusEntry.from_json(d) for d in json.loads(Path(path).read_text())]


# --- plan -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPlan:
    manifest: str
    hardware: str | None = None
    strategies: tuple[str, ...] = tuple(s.value for s in StrategyKind)
    c_values: tuple[float, ...] = DEFAULT_C_GRID
    h_min: float = 1.0 / 16
    srt_count: int = 1
    srt_mode: str = SrtMode.ALL_TERMS.value
    srt_chain_constant: bool = False
    backend: str = "sa"
    reads: int = 1000
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 5.0
    master_seed: int = 0
    out: str = "out"
    concert_policy: str = "any"
    embed_tries: int = 10
    embeddings_dir: str | None = None
    baseline_c: float = metrics.BASELINE_C
    srt_strategy: str = StrategyKind.EVEN.value
    workers: int = 1

    def __post_init__(self):
        if not self.strategies or not self.c_values:
            raise ValueError("strategies and c_values must be nonempty")
        object.__setattr__(self, "strategies", tuple(StrategyKind.parse(s).value for s in self.strategies))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))

    def backend_config(self) -> BackendConfig:
        sched = SaSchedule(self.sweeps, self.beta_start, self.beta_end, self.reads)
        return BackendConfig(self.backend, self.reads, sched)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["strategies"] = list(self.strategies)
        d["c_values"] = list(self.c_values)
        d.pop("workers")
        return d

    def check_paths(self) -> None:
        for p in (self.manifest, self.hardware, self.embeddings_dir):
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(p)


def load_hardware(path: str | None) -> HardwareGraph:
    if path is None:
        return build_chimera(ChimeraSpec(8, 8, 4))
    return HardwareGraph.from_json(load_json(path))


# --- per-instance work --------------------------------------------------------

@dataclass
class Instance:
    entry: CorpusEntry
    formula: CnfFormula
    logical: LogicalProblem
    embedding: Embedding


def prepare_instance(entry: CorpusEntry, g: HardwareGraph, plan: SweepPlan) -> Instance:
    f = entry.formula()
    logical, _ = sat_to_ising(f)
    if plan.embeddings_dir:
        path = Path(plan.embeddings_dir) / f"{entry.instance_id}.json"
        if not path.exists():
            raise EmbeddingError(f"no embedding file for {entry.instance_id}")
        emb = Embedding.from_json(load_json(path))
    else:
        emb = greedy_embed(logical, g, derive_seed(plan.master_seed, "embed", entry.instance_id), plan.embed_tries)
    return Instance(entry, f, logical, emb)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def run_cell(inst: Instance, g: HardwareGraph, plan: SweepPlan, strategy: str, c: float, srt_index: int,
             weights=None, srts=None) -> dict:
    """One grid cell; everything random is keyed by the cell's provenance."""
    entry = inst.entry
    wt = weights or compute_weights(inst.logical, g, inst.embedding)
    if srts is None:
        srts = instance_srts(inst, g, plan)
    cfg = ParamConfig(strategy=strategy, c=c, h_min=plan.h_min)
    base = parameterize(inst.logical, g, inst.embedding, cfg, weights=wt, check=False)
    r = srts[srt_index]
    p = apply_srt(base, r, plan.srt_mode) if srt_index else base
    seed = derive_seed(plan.master_seed, "cell", entry.instance_id, strategy, c, srt_index)
    ss = sample(p, plan.backend_config(), derive_seed(seed, "sample"))
    states = ss.states * r[None, :]
    rng = np.random.default_rng(derive_seed(seed, "decode"))
    batches = decode_concert_batch(states, inst.embedding, wt, rng)
    n0 = inst.formula.n_vars
    verdicts = {name: inst.formula.check(b.values[:, :n0]) for name, b in batches.items()}
    ok = accepted(verdicts, plan.concert_policy)
    p_success = metrics.success_probability(ss.multiplicity, ok)
    names = DECODERS if plan.concert_policy == "any" else ("majority",)
    answers: set[int] = set()
    for name in names:
        sel = verdicts[name]
        answers.update(metrics.encode_answers(batches[name].values[sel, :n0]))
    broken = batches["majority"].broken
    broken_frac = float((broken.sum(axis=1) * ss.multiplicity).sum() / (ss.reads * broken.shape[1]))
    return {
        "instance_id": entry.instance_id,
        "n": entry.n,
        "alpha": entry.alpha,
        "solution_count": entry.solution_count,
        "strategy": strategy,
        "c": _fmt(c),
        "h_min": _fmt(plan.h_min),
        "srt_index": srt_index,
        "srt_mode": plan.srt_mode,
        "backend": plan.backend,
        "seed": seed,
        "reads": ss.reads,
        "success_probability": _fmt(p_success),
        "unique_answers": len(answers),
        "answer_fraction": _fmt(metrics.answer_set_fraction(len(answers), entry.solution_count)),
        "mpd": _fmt(metrics.mpd(p)),
        "scale": _fmt(p.scale),
        "logical_qubits": inst.logical.n,
        "physical_qubits": len(inst.embedding.qubits),
        "max_chain_length": max(len(ch) for ch in inst.embedding.chains),
        "broken_chain_fraction": _fmt(broken_frac),
        "answers": " ".join(f"{a:x}" for a in sorted(answers)),
    }


def instance_srts(inst: Instance, g: HardwareGraph, plan: SweepPlan) -> list[np.ndarray]:
    return srt_set(
        g.N,
        plan.srt_count,
        derive_seed(plan.master_seed, "srt", inst.entry.instance_id),
        plan.srt_chain_constant,
        inst.embedding,
    )


def _instance_job(args) -> tuple[str, list[dict] | None, str | None, str | None]:
    """Returns (instance_id, rows, skip_reason, error)."""
    entry, g, plan = args
    try:
        inst = prepare_instance(entry, g, plan)
    except EmbeddingError as exc:
        return entry.instance_id, None, f"embedding: {exc}", None
    try:
        wt = compute_weights(inst.logical, g, inst.embedding)
        srts = instance_srts(inst, g, plan)
        rows = [
            run_cell(inst, g, plan, s, c, t, weights=wt, srts=srts)
            for s in plan.strategies
            for c in plan.c_values
            for t in range(plan.srt_count)
        ]
    except CapacityError as exc:
        return entry.instance_id, None, f"backend capacity: {exc}", None
    except Exception as exc:  # reported per instance, the sweep continues
        log.exception("instance %s failed", entry.instance_id)
        return entry.instance_id, None, None, f"{type(exc).__name__}: {exc}"
    return entry.instance_id, rows, None, None


@dataclass
class SweepResult:
    rows: list[dict]
    skipped: dict[str, str] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    embeddings: dict[str, Embedding] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def resolve_workers(workers: int | None) -> int:
    if workers:
        return max(1, int(workers))
    env = os.environ.get("CHAINSMITH_WORKERS")
    return max(1, int(env)) if env else 1


def run_sweep(plan: SweepPlan, workers: int | None = None) -> SweepResult:
    plan.check_paths()
    g = load_hardware(plan.hardware)
    entries = read_manifest(plan.manifest)
    jobs = [(e, g, plan) for e in entries]
    nworkers = resolve_workers(workers or plan.workers)
    if nworkers > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            outcomes = list(pool.map(_instance_job, jobs))
    else:
        outcomes = [_instance_job(j) for j in jobs]
    result = SweepResult(rows=[])
    for inst_id, rows, skip, err in outcomes:
        if skip:
            log.info("skipping %s (%s)", inst_id, skip)
            result.skipped[inst_id] = skip
        elif err:
            result.errors[inst_id] = err
        else:
            result.rows.extend(rows)
    return result


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def read_rows(path) -> list[dict]:
    return list(csv.DictReader(Path(path).read_text().splitlines()))


# --- report ----------------------------------------------------------------------

def _ckey(c: float) -> str:
    return repr(float(c))


def build_report(rows, baseline_c: float = metrics.BASELINE_C, srt_strategy: str = "even") -> dict:
    """Aggregate CSV rows (as read back from disk) into the report document."""
    rows = list(rows)
    strategies = sorted({r["strategy"] for r in rows}, key=lambda s: [k.value for k in StrategyKind].index(s))
    c_grid = sorted({float(r["c"]) for r in rows})
    instances = sorted({r["instance_id"] for r in rows})
    solution_count = {r["instance_id"]: int(r["solution_count"]) for r in rows}
    ident = [r for r in rows if int(r["srt_index"]) == 0]

    def by_instance(strategy):
        out: dict[str, dict[float, float]] = {}
        for r in ident:
            if r["strategy"] == strategy:
                out.setdefault(r["instance_id"], {})[float(r["c"])] = float(r["success_probability"])
        return out

    hist, ties, skipped, curves, excluded, scatter = {}, {}, {}, {}, {}, {}
    for s in strategies:
        per = by_instance(s)
        h = metrics.optimal_c_histogram(per, c_grid)
        hist[s] = {_ckey(c): n for c, n in h.counts.items()}
        ties[s] = {"count": h.ties, "instances": h.tied_instances}
        skipped[s] = h.skipped
        if any(abs(c - baseline_c) < 1e-9 for c in c_grid):
            curve = metrics.median_success_ratio(per, baseline_c)
            curves[s] = {_ckey(c): v for c, v in curve.median.items()}
            excluded[s] = curve.excluded
        scatter[s] = [
            {
                "instance_id": r["instance_id"],
                "c": float(r["c"]),
                "mpd": None if r["mpd"] == "inf" else float(r["mpd"]),
                "success_probability": float(r["success_probability"]),
            }
            for r in ident
            if r["strategy"] == s
        ]

    c_cmp = next((c for c in c_grid if abs(c - baseline_c) < 1e-9), c_grid[0] if c_grid else None)
    if srt_strategy not in strategies and strategies:
        srt_strategy = strategies[0]

    def answers(r):
        return set(int(a, 16) for a in r["answers"].split())

    diversity = []
    for inst in instances:
        cell = [r for r in rows if r["instance_id"] == inst and abs(float(r["c"]) - c_cmp) < 1e-9]
        params = set()
        for r in cell:
            if int(r["srt_index"]) == 0:
                params |= answers(r)
        by_strategy = {}
        for s in strategies:
            u = set()
            for r in cell:
                if r["strategy"] == s:
                    u |= answers(r)
            by_strategy[s] = {"unique": len(u), "fraction": len(u) / solution_count[inst]}
        srt_unique = by_strategy.get(srt_strategy, {"unique": 0})["unique"]
        diversity.append({
            "instance_id": inst,
            "solution_count": solution_count[inst],
            "params_unique": len(params),
            "params_fraction": len(params) / solution_count[inst],
            "srt_unique": srt_unique,
            "srt_fraction": srt_unique / solution_count[inst],
            "srt_by_strategy": by_strategy,
        })

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "baseline_c": baseline_c,
        "c_grid": c_grid,
        "strategies": strategies,
        "instances": len(instances),
        "srt_count": 1 + max((int(r["srt_index"]) for r in rows), default=0),
        "optimal_c_histogram": hist,
        "histogram_ties": ties,
        "histogram_skipped": skipped,
        "median_success_ratio": curves,
        "ratio_excluded": excluded,
        "mpd_scatter": scatter,
        "srt_vs_params": {"c": c_cmp, "srt_strategy": srt_strategy, "instances": diversity},
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_sweep(plan: SweepPlan, result: SweepResult) -> dict:
    out = Path(plan.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_text = rows_to_csv(result.rows)
    (out / "results.csv").write_text(csv_text)
    report = build_report(list(csv.DictReader(csv_text.splitlines())), plan.baseline_c, plan.srt_strategy)
    report["skipped"] = result.skipped
    report["errors"] = result.errors
    (out / "report.json").write_text(dump_report(report))
    dump_json(plan.to_json(), out / "plan.json")
    return report


def replay_row(plan: SweepPlan, row: dict) -> dict:
    """Recompute one CSV row from its recorded provenance."""
    g = load_hardware(plan.hardware)
    entry = next(e for e in read_manifest(plan.manifest) if e.instance_id == row["instance_id"])
    inst = prepare_instance(entry, g, plan)
    return run_cell(inst, g, plan, row["strategy"], float(row["c"]), int(row["srt_index"]))
