"""Gap identities on the random symmetrized corpus, worst error per grade.

    python scripts/identity_corpus.py --size 200 --seed 0
"""

import argparse
import time
from collections import defaultdict

from chaosforge.harness import identity_corpus
from chaosforge.moment_identities import gap_contractions, gap_exact, lemma31_expansion_a, lemma31_expansion_b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    worst = defaultdict(lambda: [0.0, 0.0, 0.0])
    for _, _, f in identity_corpus(args.size, args.seed):
        g = gap_exact(f)
        scale = max(1.0, abs(g))
        w = worst[(f.m, f.n, f.d)]
        for k, v in enumerate((gap_contractions(f), lemma31_expansion_a(f), lemma31_expansion_b(f))):
            w[k] = max(w[k], abs(v - g) / scale)
    print(f"{'(m,n)':>6} {'d':>2} {'contractions':>13} {'lemma a':>10} {'lemma b':>10}")
    for (m, n, d), (a, b, c) in sorted(worst.items()):
        print(f"{f'({m},{n})':>6} {d:>2} {a:>13.2e} {b:>10.2e} {c:>10.2e}")
    print(f"{args.size} kernels in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
