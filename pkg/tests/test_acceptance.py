"""Acceptance criteria, one test per criterion at its stated tolerance."""

import json
import time


from chaosforge.cli import main
from chaosforge.harness import (
    THREADS_ENV,
    SequenceSpec,
    VerifyConfig,
    identity_corpus,
    mc_estimate,
    run_verify,
    suite_chaos,
    sweep_theorem,
)
from chaosforge.moment_identities import (
    gap_contractions,
    gap_exact,
    lemma31_expansion_a,
    lemma31_expansion_b,
)
from chaosforge.tensor_core import basis_kernel

SEED = 0


def _worst(reports):
    bad = [r for r in reports if not r.passed]
    worst = max(reports, key=lambda r: r.rel_err)
    return bad, f"{len(reports) - len(bad)}/{len(reports)} checks, worst rel_err={worst.rel_err:.2e} ({worst.case})"


def test_ac1_worked_cases(criterion):
    t0 = time.perf_counter()
    f11 = basis_kernel(1, [0], [0])
    f20 = basis_kernel(1, [0, 0], [])
    vals = {
        "(1,1,1)": (gap_exact(f11), gap_contractions(f11), 6.0),
        "(2,0,1)": (gap_exact(f20), gap_contractions(f20), 16.0),
    }
    elapsed = time.perf_counter() - t0
    ok = all(abs(a - w) <= 1e-10 and abs(b - w) <= 1e-10 for a, b, w in vals.values())
    detail = "; ".join(f"{k}: exact={a:.12g} contractions={b:.12g}" for k, (a, b, _) in vals.items())
    criterion("AC1 worked-case gaps 6 and 16 (1e-10 abs, < 1 s)", ok and elapsed < 1.0, f"{detail}; {elapsed:.3f} s")


def test_ac2_identity_corpus(criterion):
    t0 = time.perf_counter()
    corpus = identity_corpus(200, SEED)
    grades = {(f.m, f.n) for _, _, f in corpus}
    dims = {f.d for _, _, f in corpus}
    worst = 0.0
    for _, _, f in corpus:
        g = gap_exact(f)
        for other in (gap_contractions(f), lemma31_expansion_a(f), lemma31_expansion_b(f)):
            worst = max(worst, abs(g - other) / max(1.0, abs(g)))
    elapsed = time.perf_counter() - t0
    ok = (
        len(corpus) == 200
        and grades == {(1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)}
        and dims == {1, 2, 3}
        and worst < 1e-9
        and elapsed < 120
    )
    criterion("AC2 identity corpus, 200 kernels (1e-9 rel, < 2 min)", ok, f"worst rel={worst:.2e}; {elapsed:.2f} s")


def test_ac2_harness_suites_agree():
    cfg = VerifyConfig(corpus_size=200)
    for suite in ("identities", "lemma31"):
        bad, _ = _worst(run_verify(suite, SEED, cfg))
        assert not bad


def test_ac3_dual_oracle(criterion):
    rows = [r for r in suite_chaos(SEED, VerifyConfig(corpus_size=200)) if r.case.startswith("chaos/dual-oracle")]
    bad, detail = _worst(rows)
    criterion("AC3 dual-oracle E|F|^4 across corpus (1e-9 rel)", len(rows) == 200 and not bad, detail)


def test_ac4_hermite_suite(criterion):
    reports = run_verify("hermite", SEED)
    kinds = {r.case.split(" ")[0] for r in reports}
    bad, detail = _worst(reports)
    need = {"hermite/closed-form", "hermite/order", "hermite/dz", "hermite/dzbar", "hermite/drho", "hermite/orthogonality"}
    criterion("AC4 Hermite suite (1e-12 rel, fd 1e-6, orthogonality exact)", need <= kinds and not bad, detail)


def test_ac5_malliavin_suite(criterion):
    reports = run_verify("malliavin", SEED)
    kinds = {r.case.split(" ")[0] for r in reports}
    bad, detail = _worst(reports)
    need = {
        "malliavin/D", "malliavin/Dbar", "malliavin/L", "malliavin/Lbar",
        "malliavin/integration-by-parts", "malliavin/duality",
        "malliavin/product", "malliavin/step1", "malliavin/step2",
    }
    missing = need - kinds
    criterion("AC5 Malliavin suite (fd 1e-6, oracle 1e-10, product 1e-8, steps 1e-9)",
              not missing and not bad, detail + (f"; missing {sorted(missing)}" if missing else ""))


def test_ac6_diagonal_sweep(criterion):
    res = sweep_theorem(SequenceSpec("diagonal", 1, 1, [1, 2, 4, 8]))
    norms_ok = all(
        abs(v**2 - 1 / row.d) <= 1e-12
        for row in res.rows
        for v in row.profile.values("ff") + row.profile.values("fh")
    )
    gaps_ok = all(abs(row.gap_exact - 6 / row.d) <= 1e-9 * (6 / row.d) for row in res.rows)
    gaps = ", ".join(f"d={r.d}: {r.gap_exact:.12g}" for r in res.rows)
    criterion("AC6 diagonal family norms^2 = 1/d, gap = 6/d, sym <= nonsym",
              norms_ok and gaps_ok and res.sym_dominated, gaps)


def test_ac7_monte_carlo(criterion, tmp_path, monkeypatch, capsys):
    t0 = time.perf_counter()
    f = basis_kernel(1, [0], [0])
    m2, se2 = mc_estimate(f, "m2", 100_000, SEED)
    m4, se4 = mc_estimate(f, "m4", 100_000, SEED)
    within = abs(m2 - 1) <= 5 * se2 and abs(m4 - 9) <= 5 * se4

    path = tmp_path / "f.json"
    path.write_text(json.dumps(f.to_json()))
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv(THREADS_ENV, threads)
        for moment in ("m2", "m4"):
            assert main(["mc", "--kernel", str(path), "--moment", moment, "--n", "100000", "--seed", str(SEED)]) == 0
        outs.append(capsys.readouterr().out.encode())
    identical = len(set(outs)) == 1
    again = mc_estimate(f, "m4", 100_000, SEED, workers=3)
    identical = identical and again == (m4, se4)
    elapsed = time.perf_counter() - t0
    criterion(
        "AC7 Monte Carlo within 5 s.e., byte-identical reruns (< 30 s)",
        within and identical and elapsed < 30,
        f"E|F|^2={m2:.5f}±{se2:.5f}, E|F|^4={m4:.4f}±{se4:.4f}, identical={identical}, {elapsed:.2f} s",
    )
