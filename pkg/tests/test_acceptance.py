"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
The lines are also repeated in pytest's terminal summary.
"""

import itertools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import embedded_instance, random_logical  # noqa: E402

from chainsmith import harness  # noqa: E402
from chainsmith.annealer import SaSchedule, exact_ground_states, sample_sa  # noqa: E402
from chainsmith.chimera import ChimeraSpec, build_chimera, greedy_embed, random_dead_mask  # noqa: E402
from chainsmith.decode import decode_concert_batch  # noqa: E402
from chainsmith.metrics import mpd, mpd_of_values, programmed_values  # noqa: E402
from chainsmith.paramset import (  # noqa: E402
    ALL_STRATEGIES,
    ParamConfig,
    SrtMode,
    apply_srt,
    chain_bound,
    compute_weights,
    parameterize,
    srt_set,
)
from chainsmith.problem import PhysicalProblem, dump_json, energies  # noqa: E402
from chainsmith.sat import CnfFormula, count_solutions, generate_mixed_sat, sat_to_ising, satisfying_assignments  # noqa: E402

RESULTS: list[str] = []


def report(tag, ok, detail, elapsed, budget):
    ok = ok and elapsed < budget
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail} [{elapsed:.1f}s / {budget:.0f}s]"
    RESULTS.append(line)
    print(line, file=sys.__stdout__, flush=True)
    return ok


def all_states(V):
    idx = np.arange(1 << V, dtype=np.int64)
    return (2 * ((idx[:, None] >> np.arange(V)) & 1) - 1).astype(np.int8)


def spectrum(p):
    """Sorted energies over every assignment of the problem's variables."""
    var = list(p.variables)
    S = np.ones((1 << len(var), p.num_qubits), dtype=np.int8)
    S[:, var] = all_states(len(var))
    return np.sort(energies(p, S))


# --- 1 -----------------------------------------------------------------------

def test_ac1_conservation():
    t0 = time.perf_counter()
    g = build_chimera(random_dead_mask(ChimeraSpec(4, 4), 6, seed=1))
    rng = np.random.default_rng(101)
    instances = []
    while len(instances) < 100:
        l = random_logical(rng, int(rng.integers(2, 11)), scale=float(rng.uniform(0.05, 2)))
        instances.append((l, greedy_embed(l, g, int(rng.integers(1 << 31)))))
    failures, worst, checks = 0, 0.0, 0
    for l, e in instances:
        wt = compute_weights(l, g, e)
        for strategy in ALL_STRATEGIES:
            for h_min in (0.0, 1 / 16, 1 / 8):
                p = parameterize(l, g, e, ParamConfig(strategy, 2.0, h_min, rescale=False), weights=wt, check=False)
                errs = [abs(sum(p.biases[q] for q in chain) - l.bias(i)) for i, chain in enumerate(e.chains)]
                errs += [
                    abs(sum(p.problem_couplings.get(k, 0.0) for k in e.couplers(g, i, j)) - l.J[(i, j)])
                    for i, j in l.edges
                ]
                worst = max(worst, max(errs))
                failures += sum(err > 1e-9 for err in errs)
                checks += 1
    ok = report("AC1 conservation", failures == 0 and checks == 1200,
                f"{checks} parameterizations, {failures} failures, max error {worst:.2e}",
                time.perf_counter() - t0, 30)
    assert ok


# --- 2 -----------------------------------------------------------------------

def test_ac2_reduction_soundness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    done, mismatches, unsat_checked, attempts = 0, 0, 0, 0
    while done < 200:
        attempts += 1
        n = int(rng.integers(1, 13))
        f = generate_mixed_sat(n, int(rng.integers(0, 2 * n + 3)), min(n, 4), int(rng.integers(1 << 40)))
        l, rmap = sat_to_ising(f)
        if l.n > 20:
            continue
        sat = set(satisfying_assignments(f))
        states, e0 = exact_ground_states(l)
        if not sat:
            # no zero-penalty state may exist for an unsatisfiable formula
            unsat_checked += 1
            mismatches += e0 < 1 - 1e-9
            continue
        projected = {tuple(int(x) for x in s[:n]) for s in states}
        mismatches += not (abs(e0) <= 1e-9 and projected == sat)
        done += 1
    ok = report("AC2 reduction soundness", mismatches == 0,
                f"{done} satisfiable formulas exact, {unsat_checked} unsatisfiable checked, {mismatches} mismatches",
                time.perf_counter() - t0, 120)
    assert ok


# --- 3 -----------------------------------------------------------------------

def test_ac3_ground_state_fidelity():
    t0 = time.perf_counter()
    good = 0
    for k in range(50):
        l, g, e = embedded_instance(3000 + k, n=int(3 + k % 5), max_qubits=16)
        strategy = ALL_STRATEGIES[k % 4]
        probe = parameterize(l, g, e, ParamConfig(strategy, 1.0))
        c = chain_bound(probe, e) + 0.25
        p = parameterize(l, g, e, ParamConfig(strategy, c))
        phys, _ = exact_ground_states(p)
        logical, _ = exact_ground_states(l)
        batches = decode_concert_batch(phys, e, compute_weights(l, g, e), np.random.default_rng(k))
        decoded = [{tuple(row) for row in b.values.tolist()} for b in batches.values()]
        want = {tuple(row) for row in logical.tolist()}
        agree = all((a == b).all() for a, b in itertools.combinations([b.values for b in batches.values()], 2))
        good += agree and all(d == want for d in decoded) and not any(b.broken.any() for b in batches.values())
    ok = report("AC3 ground-state fidelity", good == 50, f"{good}/50 instances decode to the logical ground set",
                time.perf_counter() - t0, 60)
    assert ok


# --- 4 -----------------------------------------------------------------------

def test_ac4_srt_spectrum():
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    bad_all = 0
    for _ in range(100):
        N = int(rng.integers(2, 17))
        biases = {q: float(rng.normal()) for q in range(N)}
        pc, cc = {}, {}
        for a, b in itertools.combinations(range(N), 2):
            u = rng.random()
            if u < 0.15:
                pc[(a, b)] = float(rng.normal())
            elif u < 0.3:
                cc[(a, b)] = -float(rng.uniform(1, 3))
        p = PhysicalProblem(N, biases, pc, cc)
        r = rng.choice([-1, 1], size=N)
        bad_all += not np.allclose(spectrum(p), spectrum(apply_srt(p, r, SrtMode.ALL_TERMS)), atol=1e-9, rtol=0)
    bad_chain = 0
    for k in range(100):
        l, g, e = embedded_instance(4000 + k, max_qubits=16)
        p = parameterize(l, g, e, ParamConfig(ALL_STRATEGIES[k % 4], 2.0))
        r = srt_set(g.N, 2, k, chain_constant=True, e=e)[1]
        q = apply_srt(p, r, SrtMode.PROBLEM_TERMS_ONLY)
        bad_chain += not np.allclose(spectrum(p), spectrum(q), atol=1e-9, rtol=0)
    ok = report("AC4 SRT spectrum", bad_all == 0 and bad_chain == 0,
                f"all-terms {100 - bad_all}/100, problem-terms-only with chain-constant r {100 - bad_chain}/100",
                time.perf_counter() - t0, 60)
    assert ok


# --- 5 -----------------------------------------------------------------------

def naive_mpd(values):
    best = math.inf
    for a in values:
        for b in values:
            if abs(a - b) > 1e-12:
                best = min(best, abs(a - b))
    return best


def test_ac5_mpd_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    bad = 0
    for _ in range(1000):
        N = int(rng.integers(1, 10))
        # a coarse grid forces repeated values, a few continuous ones break ties
        draw = lambda: float(rng.integers(-16, 17)) / 8 if rng.random() < 0.8 else float(rng.normal())
        biases = {q: draw() for q in range(N)}
        pc, cc = {}, {}
        for a, b in itertools.combinations(range(N), 2):
            u = rng.random()
            if u < 0.3:
                pc[(a, b)] = draw()
            elif u < 0.4:
                cc[(a, b)] = -float(rng.choice([1.6, 1.8, 2.0, 2.2, 2.4]))
        p = PhysicalProblem(N, biases, pc, cc)
        vals = programmed_values(p)
        if not vals:
            continue
        bad += mpd(p) != naive_mpd(vals)
    worked = mpd_of_values([1.0, 0.5, -0.5, -1.6])
    ok = report("AC5 MPD oracle", bad == 0 and worked == 0.5,
                f"{1000 - bad}/1000 match all-pairs, worked example -> {worked}", time.perf_counter() - t0, 10)
    assert ok


# --- 6 -----------------------------------------------------------------------

RING_THRESHOLD = 0.99


def test_ac6_sa_ring():
    ring = PhysicalProblem(16, {q: 0.0 for q in range(16)}, {(q, (q + 1) % 16): -1.0 for q in range(16)}, {})
    sample_sa(ring, SaSchedule(sweeps=2, reads=2), 0)  # compile outside the timed region
    t0 = time.perf_counter()
    ss = sample_sa(ring, SaSchedule(), rng_seed=1234)
    freq = float((np.abs(ss.states.sum(axis=1)) == 16).mean())
    ok = report("AC6 SA ring", ss.reads == 1000 and freq >= RING_THRESHOLD,
                f"ground-state frequency {freq:.3f} over {ss.reads} reads (threshold {RING_THRESHOLD})",
                time.perf_counter() - t0, 10)
    assert ok


# --- 7 and 9 share the desk sweep ----------------------------------------------

DESK_READS, DESK_SWEEPS = 100, 200


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    t0 = time.perf_counter()
    entries = harness.generate_corpus([8], [10], per_cell=24, master_seed=2016)
    harness.write_manifest(entries, root / "manifest.json")
    dump_json(ChimeraSpec(8, 8, 4).to_json(), root / "hardware.json")
    outputs = []
    for k in range(2):
        plan = harness.SweepPlan(
            str(root / "manifest.json"), str(root / "hardware.json"), srt_count=4,
            reads=DESK_READS, sweeps=DESK_SWEEPS, master_seed=2016, out=str(root / f"run{k}"),
        )
        result = harness.run_sweep(plan)
        report_doc = harness.write_sweep(plan, result)
        outputs.append((result, report_doc, (root / f"run{k}" / "results.csv").read_bytes(),
                        (root / f"run{k}" / "report.json").read_bytes()))
    return entries, outputs, time.perf_counter() - t0


@pytest.mark.slow
def test_ac7_pipeline_shape(desk):
    entries, outputs, elapsed = desk
    result, rep, csv_bytes, rep_bytes = outputs[0]
    strategies = [s.value for s in ALL_STRATEGIES]
    grid = ["1.6", "1.8", "2.0", "2.2", "2.4"]
    n_inst = rep["instances"]
    problems = []
    if n_inst < 20:
        problems.append(f"only {n_inst} embeddable instances")
    if result.errors:
        problems.append(f"errors {result.errors}")
    for s in strategies:
        hist = rep["optimal_c_histogram"].get(s, {})
        if sorted(hist) != grid or sum(hist.values()) + len(rep["histogram_skipped"][s]) != n_inst:
            problems.append(f"incomplete histogram for {s}")
        if rep["median_success_ratio"].get(s, {}).get("1.6") != 1.0:
            problems.append(f"ratio at 1.6 is not 1.0 for {s}")
        if len(rep["mpd_scatter"][s]) != n_inst * len(grid):
            problems.append(f"mpd scatter incomplete for {s}")
    deterministic = outputs[0][2:] == outputs[1][2:]
    if not deterministic:
        problems.append("runs differ")
    ok = report("AC7 pipeline shape", not problems,
                f"{n_inst} instances x 4 strategies x 5 c x 4 SRTs, {len(result.rows)} rows, "
                f"byte-identical reruns: {deterministic}" + ("; " + "; ".join(problems) if problems else ""),
                elapsed, 600)
    assert ok


@pytest.mark.slow
def test_ac9_srt_vs_params(desk):
    entries, outputs, elapsed = desk
    result, rep, _, _ = outputs[0]
    counts = {e.instance_id: e.solution_count for e in entries}
    problems = []
    rows = result.rows
    for r in rows:
        if not 0 <= float(r["answer_fraction"]) <= 1 or r["unique_answers"] > counts[r["instance_id"]]:
            problems.append(f"row {r['instance_id']} {r['strategy']} {r['c']} {r['srt_index']}")
    diversity = rep["srt_vs_params"]["instances"]
    for d in diversity:
        sc = counts[d["instance_id"]]
        fr = [d["params_fraction"], d["srt_fraction"]] + [v["fraction"] for v in d["srt_by_strategy"].values()]
        un = [d["params_unique"], d["srt_unique"]] + [v["unique"] for v in d["srt_by_strategy"].values()]
        if not all(0 <= x <= 1 for x in fr) or not all(u <= sc for u in un) or d["solution_count"] != sc:
            problems.append(d["instance_id"])
    srt_axis = {int(r["srt_index"]) for r in rows}
    if srt_axis != {0, 1, 2, 3}:
        problems.append(f"srt indices {sorted(srt_axis)}")
    if len(diversity) != rep["instances"]:
        problems.append("missing diversity entries")
    mean_p = np.mean([d["params_fraction"] for d in diversity]) if diversity else float("nan")
    mean_s = np.mean([d["srt_fraction"] for d in diversity]) if diversity else float("nan")
    ok = report("AC9 SRT-vs-parameterization", not problems,
                f"{len(diversity)} instances, mean fraction params {mean_p:.3f} vs SRTs {mean_s:.3f}"
                + ("; violations: " + ", ".join(problems[:5]) if problems else ""),
                elapsed, 600)
    assert ok


# --- 8 -----------------------------------------------------------------------

def truth_table_count(f):
    n = f.n_vars
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for c in f.clauses:
        lit_ok = np.zeros(1 << n, dtype=bool)
        for x in c:
            bit = ((idx >> (abs(x) - 1)) & 1).astype(bool)
            lit_ok |= bit if x > 0 else ~bit
        ok &= lit_ok
    return int(ok.sum())


def test_ac8_counting():
    t0 = time.perf_counter()
    cap = 1_000_000
    rng = np.random.default_rng(808)
    bad, capped = 0, 0
    for k in range(100):
        n = int(rng.integers(1, 21))
        alpha = int(rng.integers(0, 3 * n + 1))
        if k % 20 == 0:
            # only an empty 20-variable formula has more than 10^6 models
            n, alpha = 20, 0
        f = generate_mixed_sat(n, alpha, min(n, 3), int(rng.integers(1 << 40)))
        want = truth_table_count(f)
        got = count_solutions(f, cap)
        if want > cap:
            capped += 1
            bad += not (got.capped and got.count == cap)
        else:
            bad += got.capped or got.count != want
    empty = count_solutions(CnfFormula(21), cap)
    ok = report("AC8 counting", bad == 0 and empty.capped,
                f"{100 - bad}/100 match truth tables ({capped} above cap), empty n=21 capped={empty.capped}",
                time.perf_counter() - t0, 120)
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
