"""Desk-scale sweep: generate a corpus, run the full grid, print a summary.

    python scripts/desk_sweep.py --out runs/desk --per-cell 10 --reads 200 --sweeps 300

Writes manifest.json, hardware.json, results.csv, report.json and plan.json
under --out. The report carries the optimal-c histogram, the median success
ratio curve (normalized at c=1.6), the MPD scatter and the SRT-vs-strategy
answer fractions.
"""

import argparse
import json
import time
from pathlib import Path

from chainsmith import harness
from chainsmith.chimera import ChimeraSpec
from chainsmith.problem import dump_json


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="runs/desk")
    ap.add_argument("--n", type=int, nargs="+", default=[8])
    ap.add_argument("--alpha", type=int, nargs="+", default=[10])
    ap.add_argument("--per-cell", type=int, default=24)
    ap.add_argument("--reads", type=int, default=200)
    ap.add_argument("--sweeps", type=int, default=300)
    ap.add_argument("--srt-count", type=int, default=4)
    ap.add_argument("--seed", type=int, default=2016)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    entries = harness.generate_corpus(args.n, args.alpha, args.per_cell, args.seed)
    harness.write_manifest(entries, out / "manifest.json")
    dump_json(ChimeraSpec(8, 8, 4).to_json(), out / "hardware.json")
    plan = harness.SweepPlan(
        str(out / "manifest.json"),
        str(out / "hardware.json"),
        srt_count=args.srt_count,
        reads=args.reads,
        sweeps=args.sweeps,
        master_seed=args.seed,
        out=str(out),
        workers=harness.resolve_workers(args.workers),
    )
    result = harness.run_sweep(plan)
    report = harness.write_sweep(plan, result)
    print(f"{len(entries)} instances, {len(result.rows)} rows, {len(result.skipped)} skipped "
          f"in {time.perf_counter() - t0:.0f}s")
    print("optimal-c histogram:")
    for s, hist in report["optimal_c_histogram"].items():
        print(f"  {s:22s} {json.dumps(hist)}  ties={report['histogram_ties'][s]['count']}")
    print("median P(c)/P(1.6):")
    for s, curve in report["median_success_ratio"].items():
        print(f"  {s:22s} " + "  ".join(f"{c}:{v:.3f}" for c, v in curve.items()))
    div = report["srt_vs_params"]["instances"]
    if div:
        mp = sum(d["params_fraction"] for d in div) / len(div)
        ms = sum(d["srt_fraction"] for d in div) / len(div)
        print(f"mean answer fraction: strategies {mp:.3f}, SRTs {ms:.3f}")


if __name__ == "__main__":
    main()
