"""Contraction norms and fourth-moment gap along a kernel sequence.

    python scripts/theorem_sweep.py --family diagonal --m 1 --n 1 --dims 1,2,4,8
"""

import argparse
import json

from chaosforge.harness import SequenceSpec, sweep_theorem


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", choices=("diagonal", "random-sparse"), default="diagonal")
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--dims", default="1,2,4,8")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="dump the full result as JSON")
    args = ap.parse_args()

    spec = SequenceSpec(args.family, args.m, args.n, [int(x) for x in args.dims.split(",")], args.seed)
    res = sweep_theorem(spec)
    if args.json:
        print(json.dumps(res.to_json(), indent=2))
        return
    print(f"{'d':>4} {'gap':>14} {'bound':>14} {'max nonsym':>12} {'max sym':>12}")
    for r in res.rows:
        print(f"{r.d:>4} {r.gap_exact:>14.8g} {r.bound:>14.8g} {r.profile.max_nonsym():>12.6g} {r.profile.max_sym():>12.6g}")
    for k, v in res.to_json()["flags"].items():
        print(f"{k}: {v}")


if __name__ == "__main__":
    main()
