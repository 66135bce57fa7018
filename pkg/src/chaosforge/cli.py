"""Command-line entry point: ``chaosforge {hermite,verify,sweep,mc}``.

Exit status: 0 when every check passes, 1 on any failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .harness import SUITES, SequenceSpec, VerifyConfig, mc_estimate, run_verify, sweep_theorem
from .hermite import hermite_eval
from .reports import emit_report
from .tensor_core import KernelTensor

SWEEP_CSV_COLUMNS = ("d", "gap_exact", "gap_contractions", "lemma_bound", "max_nonsym_norm", "max_sym_norm")


def _dims(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaosforge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chaosforge {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hermite", help="complex Hermite polynomials")
    hsub = h.add_subparsers(dest="hermite_command", required=True)
    he = hsub.add_parser("eval", help="evaluate J_{m,n}(z, rho)")
    he.add_argument("--m", type=int, required=True)
    he.add_argument("--n", type=int, required=True)
    he.add_argument("--z-re", type=float, default=0.0)
    he.add_argument("--z-im", type=float, default=0.0)
    he.add_argument("--rho", type=float, default=1.0)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--corpus-size", type=int, default=VerifyConfig.corpus_size)

    s = sub.add_parser("sweep", help="contraction-norm sweep over a kernel sequence")
    s.add_argument("--family", choices=("diagonal", "random-sparse", "file"), default="diagonal")
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--dims", type=_dims, default=[1, 2, 4, 8])
    s.add_argument("--kernels", nargs="*", default=[], help="kernel JSON files for --family file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mc", type=int, default=0, help="Monte Carlo draws per element (0 disables)")
    s.add_argument("--out", type=Path)
    s.add_argument("--format", choices=("json", "csv"), default="json")

    m = sub.add_parser("mc", help="Monte Carlo moment estimate")
    m.add_argument("--kernel", type=Path, required=True)
    m.add_argument("--moment", choices=("m2", "m4", "f2"), required=True)
    m.add_argument("--n", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=0)
    return p


def _banner(seed=None):
    tail = "" if seed is None else f" seed={seed}"
    print(f"chaosforge {__version__}{tail}")


def _cmd_hermite(args) -> int:
    _banner()
    val = hermite_eval(args.m, args.n, complex(args.z_re, args.z_im), args.rho)
    print(json.dumps({"m": args.m, "n": args.n, "z": [args.z_re, args.z_im], "rho": args.rho, "value": [val.real, val.imag]}))
    return 0


def _cmd_verify(args) -> int:
    _banner(args.seed)
    results = run_verify(args.suite, args.seed, VerifyConfig(corpus_size=args.corpus_size))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"FAIL {r.case} (m={r.m}, n={r.n}, d={r.d}) rel_err={r.rel_err:.3e}")
    print(f"{args.suite}: {len(results) - len(failed)}/{len(results)} checks passed")
    if args.out:
        emit_report(results, args.format, args.out)
    return 1 if failed else 0


def _cmd_sweep(args) -> int:
    _banner(args.seed)
    spec = SequenceSpec(args.family, args.m, args.n, args.dims, args.seed, paths=args.kernels)
    result = sweep_theorem(spec, mc_draws=args.mc)
    for row in result.rows:
        print(
            f"d={row.d:3d}  gap={row.gap_exact:.12g}  max|f⊗f|,|f⊗h|={row.profile.max_nonsym():.6g}"
            f"  max sym={row.profile.max_sym():.6g}"
        )
    flags = result.to_json()["flags"]
    print(" ".join(f"{k}={v}" for k, v in flags.items()))
    if args.out:
        if args.format == "json":
            args.out.write_text(json.dumps(result.to_json(), indent=2) + "\n")
        else:
            with args.out.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(SWEEP_CSV_COLUMNS)
                for row in result.rows:
                    js = row.to_json()
                    w.writerow([repr(js[c]) if isinstance(js[c], float) else js[c] for c in SWEEP_CSV_COLUMNS])
    return 0 if result.sym_dominated and result.bound_holds else 1


def _cmd_mc(args) -> int:
    _banner(args.seed)
    f = KernelTensor.from_json(json.loads(args.kernel.read_text()))
    est, se = mc_estimate(f, args.moment, args.n, args.seed)
    est_out = [est.real, est.imag] if isinstance(est, complex) else est
    print(json.dumps({"moment": args.moment, "n": args.n, "seed": args.seed, "estimate": est_out, "stderr": se}))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"hermite": _cmd_hermite, "verify": _cmd_verify, "sweep": _cmd_sweep, "mc": _cmd_mc}[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
