"""MPD of each parameter-setting strategy across chain couplings for one corpus.

Prints, per strategy and c, the median MPD over instances. No sampling is
involved, so this runs in seconds. It shows how the strategies and h_min
clipping spread the programmed value set. The chain value only moves MPD
when -c lands closer to a problem term than any two problem terms are.
"""

import argparse
import statistics

from chainsmith import harness
from chainsmith.chimera import ChimeraSpec, EmbeddingError, build_chimera, greedy_embed
from chainsmith.metrics import mpd
from chainsmith.paramset import ALL_STRATEGIES, ParamConfig, compute_weights, parameterize
from chainsmith.sat import sat_to_ising
from chainsmith.seeds import derive_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--alpha", type=int, default=20)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--h-min", type=float, default=1 / 16)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    g = build_chimera(ChimeraSpec(8, 8, 4))
    table = {(s.value, c): [] for s in ALL_STRATEGIES for c in harness.DEFAULT_C_GRID}
    for entry in harness.generate_corpus([args.n], [args.alpha], args.count, args.seed):
        l, _ = sat_to_ising(entry.formula())
        try:
            e = greedy_embed(l, g, derive_seed(args.seed, "embed", entry.instance_id))
        except EmbeddingError:
            continue
        wt = compute_weights(l, g, e)
        for s in ALL_STRATEGIES:
            for c in harness.DEFAULT_C_GRID:
                p = parameterize(l, g, e, ParamConfig(s, c, args.h_min), weights=wt, check=False)
                table[(s.value, c)].append(mpd(p))
    print("strategy".ljust(22) + "".join(f"c={c:<8}" for c in harness.DEFAULT_C_GRID))
    for s in ALL_STRATEGIES:
        cells = [statistics.median(table[(s.value, c)]) for c in harness.DEFAULT_C_GRID]
        print(s.value.ljust(22) + "".join(f"{v:<10.4f}" for v in cells))


if __name__ == "__main__":
    main()
