"""Ground-state frequency of the SA surrogate on a ferromagnetic ring."""

import argparse
import time

import numpy as np

from chainsmith.annealer import SaSchedule, sample_sa
from chainsmith.problem import PhysicalProblem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spins", type=int, default=16)
    ap.add_argument("--reads", type=int, default=1000)
    ap.add_argument("--sweeps", type=int, default=1000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1234])
    args = ap.parse_args()
    n = args.spins
    ring = PhysicalProblem(n, {q: 0.0 for q in range(n)}, {(q, (q + 1) % n): -1.0 for q in range(n)}, {})
    sched = SaSchedule(sweeps=args.sweeps, reads=args.reads)
    for seed in args.seeds:
        t0 = time.perf_counter()
        ss = sample_sa(ring, sched, seed)
        freq = (np.abs(ss.states.sum(axis=1)) == n).mean()
        print(f"seed {seed}: ground state in {freq:.3f} of {ss.reads} reads, "
              f"min energy {ss.energy.min():g}, {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
