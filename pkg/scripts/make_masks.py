"""Write the example dead-qubit masks to data/hardware/.

The dead indices are drawn uniformly at random from a fixed seed. They only
mimic the yield counts of real chips (8 of 512, 54 of 1152) and are NOT
real yield maps.
"""

import argparse
from pathlib import Path

from chainsmith.chimera import ChimeraSpec, random_dead_mask
from chainsmith.problem import dump_json

MASKS = {
    "dw2_like": (ChimeraSpec(8, 8, 4), 8),
    "dw2x_like": (ChimeraSpec(12, 12, 4), 54),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "hardware"))
    ap.add_argument("--seed", type=int, default=2016)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (spec, dead) in MASKS.items():
        masked = random_dead_mask(spec, dead, args.seed)
        doc = dict(masked.to_json(), note="synthetic dead-qubit mask, NOT a real chip yield map")
        dump_json(doc, out / f"{name}.json")
        print(f"{name}: {masked.N} qubits, {len(masked.dead)} dead -> {out / (name + '.json')}")


if __name__ == "__main__":
    main()
