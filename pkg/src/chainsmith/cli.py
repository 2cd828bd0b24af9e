"""Command-line entry point: ``chainsmith <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, metrics
from .annealer import BackendConfig, SaSchedule, SampleSet, sample
from .chimera import ChimeraSpec, EmbeddingError, greedy_embed
from .decode import accepted, decode_concert_batch
from .paramset import ParamConfig, SrtMode, StrategyKind, apply_srt, compute_weights, parameterize, srt_set
from .problem import Embedding, HardwareGraph, LogicalProblem, PhysicalProblem, dump_json, load_json
from .sat import DEFAULT_CAP, count_solutions, emit_dimacs, parse_dimacs, sat_to_ising

log = logging.getLogger("chainsmith")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _strategies(text: str) -> tuple[str, ...]:
    if text.strip() == "all":
        return tuple(s.value for s in StrategyKind)
    return tuple(StrategyKind.parse(s).value for s in text.replace(",", " ").split())


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _backend(args) -> BackendConfig:
    sched = SaSchedule(args.sweeps, args.beta_start, args.beta_end, args.reads)
    return BackendConfig(args.backend, args.reads, sched)


def cmd_gen(args) -> int:
    preset = harness.PRESETS[args.preset]
    ns = _ints(args.n) if args.n else preset["n"]
    alphas = _ints(args.alpha) if args.alpha else preset["alpha"]
    entries = harness.generate_corpus(ns, alphas, args.per_cell, args.seed, args.max_len, args.cap)
    out = _out(args)
    cnf_dir = out / "cnf"
    cnf_dir.mkdir(exist_ok=True)
    for e in entries:
        (cnf_dir / f"{e.instance_id}.cnf").write_text(emit_dimacs(e.formula(), comment=e.instance_id))
    harness.write_manifest(entries, out / "manifest.json")
    rows, cols, t = preset["chimera"]
    spec = ChimeraSpec(rows, cols, t)
    if preset["dead"]:
        from .chimera import random_dead_mask

        spec = random_dead_mask(spec, preset["dead"], args.seed)
    dump_json(spec.to_json(), out / "hardware.json")
    print(f"{len(entries)} instances -> {out / 'manifest.json'}")
    return 0


def cmd_count(args) -> int:
    f = parse_dimacs(Path(args.cnf).read_text())
    res = count_solutions(f, args.cap)
    print(json.dumps({"count": res.count, "capped": res.capped}))
    return 0


def cmd_reduce(args) -> int:
    f = parse_dimacs(Path(args.cnf).read_text())
    problem, rmap = sat_to_ising(f)
    out = _out(args)
    stem = Path(args.cnf).stem
    dump_json(problem.to_json(), out / f"{stem}.logical.json")
    dump_json(rmap.to_json(), out / f"{stem}.reduction.json")
    print(f"{problem.n} logical spins ({rmap.n_ancilla} ancillas)")
    return 0


def cmd_embed(args) -> int:
    l = LogicalProblem.from_json(load_json(args.logical))
    g = HardwareGraph.from_json(load_json(args.hardware))
    try:
        emb = greedy_embed(l, g, args.seed, args.tries)
    except EmbeddingError as exc:
        print(f"embedding failed: {exc}", file=sys.stderr)
        return 2
    out = _out(args)
    path = out / f"{Path(args.logical).name.split('.')[0]}.embedding.json"
    dump_json(emb.to_json(), path)
    print(f"{len(emb.qubits)} physical qubits, longest chain {max((len(c) for c in emb.chains), default=0)} -> {path}")
    return 0


def cmd_parametrize(args) -> int:
    l = LogicalProblem.from_json(load_json(args.logical))
    g = HardwareGraph.from_json(load_json(args.hardware))
    e = Embedding.from_json(load_json(args.embedding))
    cfg = ParamConfig(strategy=args.strategy, c=args.chain_coupling, h_min=args.h_min)
    p = parameterize(l, g, e, cfg)
    doc = p.to_json()
    if args.srt_index:
        srts = srt_set(g.N, args.srt_count, args.srt_seed, args.srt_chain_constant, e)
        r = srts[args.srt_index]
        p = apply_srt(p, r, args.srt_mode)
        doc = p.to_json()
        doc["srt"] = [int(x) for x in r]
        doc["srt_mode"] = args.srt_mode
    try:
        value = metrics.mpd(p)
        doc["mpd"] = None if value == float("inf") else value
    except metrics.UndefinedMPD:
        doc["mpd"] = None
    out = _out(args)
    path = out / f"{Path(args.logical).name.split('.')[0]}.{cfg.strategy.value}.c{args.chain_coupling}.physical.json"
    dump_json(doc, path)
    print(path)
    return 0


def cmd_sample(args) -> int:
    doc = load_json(args.physical)
    p = PhysicalProblem.from_json(doc)
    ss = sample(p, _backend(args), args.seed)
    out = _out(args)
    path = out / f"{Path(args.physical).name.split('.')[0]}.samples.csv"
    ss.save(path, p.variables)
    print(f"{ss.reads} reads, min energy {ss.energy.min():.6g} -> {path}")
    return 0


def cmd_decode(args) -> int:
    ss = SampleSet.load(args.samples)
    l = LogicalProblem.from_json(load_json(args.logical))
    g = HardwareGraph.from_json(load_json(args.hardware))
    e = Embedding.from_json(load_json(args.embedding))
    f = parse_dimacs(Path(args.cnf).read_text())
    states = ss.states
    if args.physical:
        doc = load_json(args.physical)
        if "srt" in doc:
            states = states * np.asarray(doc["srt"], dtype=np.int8)[None, :]
    wt = compute_weights(l, g, e)
    batches = decode_concert_batch(states, e, wt, np.random.default_rng(args.seed))
    n0 = f.n_vars
    verdicts = {k: f.check(b.values[:, :n0]) for k, b in batches.items()}
    out = _out(args)
    path = out / f"{Path(args.samples).stem}.decoded.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance_id", "read_index", "decoder", "assignment", "broken_chain_count", "satisfied"])
        for x in range(len(ss)):
            for name, b in batches.items():
                bits = "".join("1" if v > 0 else "0" for v in b.values[x, :n0])
                w.writerow([args.instance_id, x, name, bits, int(b.broken[x].sum()), int(verdicts[name][x])])
    ok = accepted(verdicts, args.concert_policy)
    print(f"success probability {metrics.success_probability(ss.multiplicity, ok):.4f} -> {path}")
    return 0


def _plan(args) -> harness.SweepPlan:
    return harness.SweepPlan(
        manifest=args.manifest,
        hardware=args.hardware,
        strategies=_strategies(args.strategies),
        c_values=_floats(args.chain_couplings),
        h_min=args.h_min,
        srt_count=args.srt_count,
        srt_mode=args.srt_mode,
        srt_chain_constant=args.srt_chain_constant,
        backend=args.backend,
        reads=args.reads,
        sweeps=args.sweeps,
        beta_start=args.beta_start,
        beta_end=args.beta_end,
        master_seed=args.seed,
        out=args.out,
        concert_policy=args.concert_policy,
        embed_tries=args.embed_tries,
        embeddings_dir=args.embeddings,
        srt_strategy=args.srt_strategy,
        workers=harness.resolve_workers(args.workers),
    )


def cmd_sweep(args) -> int:
    plan = _plan(args)
    result = harness.run_sweep(plan)
    report = harness.write_sweep(plan, result)
    print(f"{len(result.rows)} rows, {report['instances']} instances, "
          f"{len(result.skipped)} skipped, {len(result.errors)} errors -> {plan.out}")
    if result.errors:
        for inst, err in sorted(result.errors.items()):
            print(f"  {inst}: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_report(args) -> int:
    rows = harness.read_rows(args.results)
    report = harness.build_report(rows, args.baseline_c, args.srt_strategy)
    text = harness.dump_report(report)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _out(args)
        (Path(args.out) / "report.json").write_text(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--workers", type=int, default=None, help="worker processes (env CHAINSMITH_WORKERS)")
    common.add_argument("--backend", choices=["exact", "sa"], default="sa")
    common.add_argument("-v", "--verbose", action="store_true")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--reads", type=int, default=1000)
    sampling.add_argument("--sweeps", type=int, default=1000)
    sampling.add_argument("--beta-start", type=float, default=0.1)
    sampling.add_argument("--beta-end", type=float, default=5.0)

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--h-min", type=float, default=1.0 / 16)
    params.add_argument("--srt-count", type=int, default=1)
    params.add_argument("--srt-mode", choices=[m.value for m in SrtMode], default=SrtMode.ALL_TERMS.value)
    params.add_argument("--srt-chain-constant", action="store_true")

    policy = argparse.ArgumentParser(add_help=False)
    policy.add_argument("--concert-policy", choices=["any", "majority-only"], default="any")

    ap = argparse.ArgumentParser(prog="chainsmith", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a mixed-SAT corpus")
    p.add_argument("--preset", choices=sorted(harness.PRESETS), default="desk")
    p.add_argument("--n", help="variable counts, e.g. '8,10'")
    p.add_argument("--alpha", help="clause counts, e.g. '10,20'")
    p.add_argument("--per-cell", type=int, default=10)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("count", parents=[common], help="count solutions of a DIMACS formula")
    p.add_argument("cnf")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("reduce", parents=[common], help="reduce a DIMACS formula to an Ising problem")
    p.add_argument("cnf")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("embed", parents=[common], help="greedy-embed a logical problem")
    p.add_argument("logical")
    p.add_argument("hardware")
    p.add_argument("--tries", type=int, default=10)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("parametrize", parents=[common, params], help="build a physical problem")
    p.add_argument("logical")
    p.add_argument("hardware")
    p.add_argument("embedding")
    p.add_argument("--strategy", default="even", type=lambda s: StrategyKind.parse(s).value)
    p.add_argument("--chain-coupling", type=float, default=2.0)
    p.add_argument("--srt-seed", type=int, default=0)
    p.add_argument("--srt-index", type=int, default=0, help="which vector of the SRT set to apply")
    p.set_defaults(func=cmd_parametrize)

    p = sub.add_parser("sample", parents=[common, sampling], help="sample a physical problem")
    p.add_argument("physical")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("decode", parents=[common, policy], help="decode a sample file")
    p.add_argument("samples")
    p.add_argument("--logical", required=True)
    p.add_argument("--hardware", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--cnf", required=True)
    p.add_argument("--physical", help="physical problem JSON; undoes its SRT if present")
    p.add_argument("--instance-id", default="instance")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", parents=[common, sampling, params, policy], help="run the full grid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--hardware")
    p.add_argument("--embeddings", help="directory of <instance_id>.json embeddings to import")
    p.add_argument("--strategies", default="all")
    p.add_argument("--chain-couplings", default=" ".join(str(c) for c in harness.DEFAULT_C_GRID))
    p.add_argument("--embed-tries", type=int, default=10)
    p.add_argument("--srt-strategy", default="even")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", parents=[common], help="rebuild report.json from results.csv")
    p.add_argument("results")
    p.add_argument("--baseline-c", type=float, default=metrics.BASELINE_C)
    p.add_argument("--srt-strategy", default="even")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
