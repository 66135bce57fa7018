"""Monte Carlo E|F|^2 and E|F|^4 against the exact oracle.

    CHAOSFORGE_THREADS=4 python scripts/mc_fourth_moment.py --draws 100000
"""

import argparse

import numpy as np

from chaosforge.chaos_engine import ChaosElement
from chaosforge.harness import gen_diagonal, mc_estimate
from chaosforge.tensor_core import random_kernel, symmetrize
from chaosforge.wick import exact_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = {
        "unit (1,1) d=1": gen_diagonal(1, 1, 1),
        "diagonal (1,1) d=4": gen_diagonal(1, 1, 4),
        "random (2,1) d=2": symmetrize(random_kernel(2, 2, 1, rng)),
    }
    for name, f in cases.items():
        F = ChaosElement.from_kernel(f)
        exact = {
            "m2": exact_moment([(F, False), (F, True)]).real,
            "m4": exact_moment([(F, False), (F, True)] * 2).real,
        }
        for which, want in exact.items():
            est, se = mc_estimate(f, which, args.draws, args.seed)
            z = (est - want) / se if se else 0.0
            print(f"{name:<20} {which}  exact={want:<10.6g} mc={est:<10.6g} se={se:<9.3g} z={z:+.2f}")


if __name__ == "__main__":
    main()
