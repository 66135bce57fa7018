"""Kernel sequences, convergence sweeps, Monte Carlo estimates and verification suites."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hermite as hm
from .chaos_engine import (
    ChaosElement,
    GaussianSample,
    complex_normals,
    conjugate_elem,
    evaluate,
    l2_inner,
    multiply,
)
from .malliavin_ops import h_inner, mall_D, mall_Dbar, ou_L, ou_Lbar, wirtinger_fd
from .moment_identities import (
    ContractionProfile,
    build_psi,
    build_theta,
    build_varphi,
    build_varsigma,
    contraction_profile,
    ff_top,
    gap_contractions,
    gap_exact,
    lemma31_bound,
    lemma31_expansion_a,
    lemma31_expansion_b,
)
from .reports import VerificationReport, check, check_flag
from .tensor_core import KernelTensor, basis_kernel, conj_flip, inner, norm, random_kernel, symmetrize
from .wick import exact_moment, to_polynomial

THREADS_ENV = "CHAOSFORGE_THREADS"
SUITES = ("hermite", "chaos", "malliavin", "identities", "lemma31")
CORPUS_GRADES = ((1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2))
CORPUS_DIMS = (1, 2, 3)
MC_SHARD = 10_000


@dataclass
class VerifyConfig:
    corpus_size: int = 200
    identity_tol: float = 1e-9
    oracle_tol: float = 1e-10
    hermite_tol: float = 1e-12
    fd_tol: float = 1e-6
    product_rule_tol: float = 1e-8
    mc_draws: int = 100_000
    mc_bound: float = 5.0
    samples: int = 50


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn, items, workers: int | None = None) -> list:
    """``map`` that may run on threads but always returns results in input order."""
    workers = worker_count() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def case_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


# ------------------------------------------------------------- generators


def gen_diagonal(m: int, n: int, d: int) -> KernelTensor:
    """``d^(-1/2) sum_a e_a^{⊗m} ⊗ ē_a^{⊗n}``; unit norm, already symmetric."""
    arr = np.zeros((d,) * (m + n), dtype=np.complex128)
    for a in range(d):
        arr[(a,) * (m + n)] = 1 / math.sqrt(d)
    return KernelTensor(d, m, n, arr)


def gen_random_sparse(m: int, n: int, d: int, rng: np.random.Generator) -> KernelTensor:
    """Diagonal support with random complex weights, normalized to unit norm."""
    w = complex_normals(rng, (d,))
    w = w / np.linalg.norm(w)
    arr = np.zeros((d,) * (m + n), dtype=np.complex128)
    for a in range(d):
        arr[(a,) * (m + n)] = w[a]
    return KernelTensor(d, m, n, arr)


def identity_corpus(size: int, seed: int):
    """Deterministic list of ``(index, case_seed, kernel)`` spanning the corpus grades and dims."""
    combos = [(g, d) for g in CORPUS_GRADES for d in CORPUS_DIMS]
    out = []
    for idx in range(size):
        (m, n), d = combos[idx % len(combos)]
        rng = case_rng(seed, idx)
        out.append((idx, derived_seed(seed, idx), symmetrize(random_kernel(d, m, n, rng))))
    return out


# ----------------------------------------------------------------- sweeps


@dataclass
class SequenceSpec:
    family: str
    m: int
    n: int
    dims: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    seed: int = 0
    count: int | None = None
    paths: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.family not in ("diagonal", "random-sparse", "file"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family != "file":
            if any(b <= a for a, b in zip(self.dims, self.dims[1:])):
                raise ValueError("dims must be strictly increasing")
            if self.count is None:
                self.count = len(self.dims)
            if self.count > len(self.dims):
                raise ValueError("count exceeds the number of dims")
        elif self.count is None:
            self.count = len(self.paths)

    def kernels(self) -> list[KernelTensor]:
        if self.family == "diagonal":
            return [gen_diagonal(self.m, self.n, d) for d in self.dims[: self.count]]
        if self.family == "random-sparse":
            return [
                gen_random_sparse(self.m, self.n, d, case_rng(self.seed, k))
                for k, d in enumerate(self.dims[: self.count])
            ]
        return [KernelTensor.from_json(json.loads(Path(p).read_text())) for p in self.paths[: self.count]]


@dataclass
class SweepRow:
    d: int
    profile: ContractionProfile
    gap_exact: float
    gap_contractions: float
    bound: float
    mc: tuple[float, float] | None = None

    def to_json(self) -> dict:
        out = {
            "d": self.d,
            "gap_exact": self.gap_exact,
            "gap_contractions": self.gap_contractions,
            "lemma_bound": self.bound,
            "max_nonsym_norm": self.profile.max_nonsym(),
            "max_sym_norm": self.profile.max_sym(),
            "profile": self.profile.to_json(),
        }
        if self.mc is not None:
            out["mc_fourth_moment"] = {"estimate": self.mc[0], "stderr": self.mc[1]}
        return out


def _strictly_decreasing(xs) -> bool:
    return len(xs) >= 2 and all(b < a for a, b in zip(xs, xs[1:]))


@dataclass
class SweepResult:
    rows: list[SweepRow]
    seed: int = 0

    @property
    def sym_dominated(self) -> bool:
        return all(r.profile.sym_dominated() for r in self.rows)

    @property
    def bound_holds(self) -> bool:
        return all(r.gap_exact <= r.bound * (1 + 1e-9) + 1e-12 for r in self.rows)

    @property
    def nonsym_decreasing(self) -> bool:
        return _strictly_decreasing([r.profile.max_nonsym() for r in self.rows])

    @property
    def sym_decreasing(self) -> bool:
        return _strictly_decreasing([r.profile.max_sym() for r in self.rows])

    @property
    def gap_decreasing(self) -> bool:
        return _strictly_decreasing([r.gap_exact for r in self.rows])

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "rows": [r.to_json() for r in self.rows],
            "flags": {
                "sym_dominated": self.sym_dominated,
                "bound_holds": self.bound_holds,
                "nonsym_decreasing": self.nonsym_decreasing,
                "sym_decreasing": self.sym_decreasing,
                "gap_decreasing": self.gap_decreasing,
            },
        }


def sweep_kernels(kernels, seed: int = 0, mc_draws: int = 0) -> SweepResult:
    def row(item):
        k, f = item
        f = symmetrize(f)
        mc = mc_estimate(f, "m4", mc_draws, derived_seed(seed, k)) if mc_draws else None
        prof = contraction_profile(f)
        return SweepRow(f.d, prof, gap_exact(f), gap_contractions(f), lemma31_bound(prof), mc)

    return SweepResult(ordered_map(row, list(enumerate(kernels))), seed)


def sweep_theorem(spec: SequenceSpec, mc_draws: int = 0) -> SweepResult:
    if spec.m + spec.n < 2:
        raise ValueError("theorem sweeps need m + n >= 2")
    return sweep_kernels(spec.kernels(), spec.seed, mc_draws)


# ------------------------------------------------------------ Monte Carlo


_STATISTICS = {
    "m2": lambda v: np.abs(v) ** 2,
    "m4": lambda v: np.abs(v) ** 4,
    "f2": lambda v: v**2,
}


def mc_estimate(f: KernelTensor, which: str, N: int, seed: int, workers: int | None = None):
    """Sample mean and standard error of |F|^2 (``m2``), |F|^4 (``m4``) or F^2 (``f2``).

    Draws are split into fixed-size shards seeded by ``(seed, shard)`` and
    recombined in shard order, so the result does not depend on ``workers``.
    """
    if which not in _STATISTICS:
        raise ValueError(f"unknown moment {which!r}; expected one of {sorted(_STATISTICS)}")
    if N < 1000:
        raise ValueError("need at least 1000 draws")
    F = ChaosElement.from_kernel(f)
    stat = _STATISTICS[which]
    sizes = [MC_SHARD] * (N // MC_SHARD) + ([N % MC_SHARD] if N % MC_SHARD else [])

    def shard(k):
        z = complex_normals(case_rng(seed, k), (sizes[k], f.d))
        return stat(evaluate(F, z))

    vals = np.concatenate(ordered_map(shard, range(len(sizes)), workers))
    mean = vals.mean()
    stderr = float(np.sqrt(np.mean(np.abs(vals - mean) ** 2) * N / (N - 1)) / math.sqrt(N))
    if which != "f2":
        mean = float(mean.real)
    else:
        mean = complex(mean)
    return mean, stderr


# ------------------------------------------------------------------ suites


def _rand_elem(rng, d, m, n) -> ChaosElement:
    return ChaosElement.from_kernel(random_kernel(d, m, n, rng))


def suite_hermite(seed: int, cfg: VerifyConfig) -> list[VerificationReport]:
    out = []
    radii = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0])
    angles = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    z = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    for rho in (0.5, 1.0, 2.0):
        rec = hm.hermite_table(10, 10, z, rho)
        alt = hm.hermite_table(10, 10, z, rho, order="n-first")
        for m in range(11):
            for n in range(11):
                cf = hm.eval_coeffs(hm.hermite_coeffs(m, n), z, rho)
                scale = np.maximum(1.0, np.abs(cf))
                k = int(np.argmax(np.abs(rec[m, n] - cf) / scale))
                out.append(check(f"hermite/closed-form rho={rho}", cf[k], rec[m, n, k], cfg.hermite_tol, m=m, n=n, d=1, seed=seed))
                k = int(np.argmax(np.abs(rec[m, n] - alt[m, n]) / np.maximum(1.0, np.abs(rec[m, n]))))
                out.append(check(f"hermite/order rho={rho}", rec[m, n, k], alt[m, n, k], cfg.hermite_tol, m=m, n=n, d=1, seed=seed))
    rng = case_rng(seed, 0)
    h = 1e-5
    for m in range(6):
        for n in range(6):
            for _ in range(4):
                z0 = complex(*rng.uniform(-1.4, 1.4, 2))
                rho = float(rng.uniform(0.5, 2.0))
                J = lambda zz, rr=rho: hm.hermite_eval(m, n, zz, rr)
                dx = (J(z0 + h) - J(z0 - h)) / (2 * h)
                dy = (J(z0 + 1j * h) - J(z0 - 1j * h)) / (2 * h)
                drho = (hm.hermite_eval(m, n, z0, rho + h) - hm.hermite_eval(m, n, z0, rho - h)) / (2 * h)
                for name, fd, an in (
                    ("dz", (dx - 1j * dy) / 2, hm.hermite_dz(m, n, z0, rho)),
                    ("dzbar", (dx + 1j * dy) / 2, hm.hermite_dzbar(m, n, z0, rho)),
                    ("drho", drho, hm.hermite_drho(m, n, z0, rho)),
                ):
                    out.append(check(f"hermite/{name}", an, fd, cfg.fd_tol, m=m, n=n, d=1, seed=seed))
    for m in range(4):
        for n in range(4):
            Fmn = ChaosElement.from_kernel(basis_kernel(1, [0] * m, [0] * n))
            for p in range(4):
                for q in range(4):
                    Fpq = ChaosElement.from_kernel(basis_kernel(1, [0] * p, [0] * q))
                    want = math.factorial(m) * math.factorial(n) if (m, n) == (p, q) else 0
                    got = exact_moment([(Fmn, False), (Fpq, True)])
                    out.append(check(f"hermite/orthogonality p={p} q={q}", want, got, 1e-12, m=m, n=n, d=1, seed=seed, mode="abs"))
    return out


def suite_chaos(seed: int, cfg: VerifyConfig) -> list[VerificationReport]:
    out = []
    grades = ((1, 0), (1, 1), (2, 0), (2, 1))
    idx = 0
    for d in (1, 2, 3):
        for g1 in grades:
            for g2 in grades:
                rng = case_rng(seed, idx)
                idx += 1
                F, G = _rand_elem(rng, d, *g1), _rand_elem(rng, d, *g2)
                z = complex_normals(rng, (100, d))
                prod = evaluate(multiply(F, G), z)
                direct = evaluate(F, z) * evaluate(G, z)
                k = int(np.argmax(np.abs(prod - direct) / np.maximum(1, np.abs(direct))))
                out.append(check(f"chaos/product {g1}x{g2}", direct[k], prod[k], cfg.identity_tol, m=g1[0], n=g1[1], d=d, seed=seed))
                poly = to_polynomial(F).evaluate(z)
                fz = evaluate(F, z)
                k = int(np.argmax(np.abs(poly - fz) / np.maximum(1, np.abs(fz))))
                out.append(check(f"chaos/polynomial {g1}", fz[k], poly[k], cfg.oracle_tol, m=g1[0], n=g1[1], d=d, seed=seed))
    for k, cs, f in identity_corpus(cfg.corpus_size, seed):
        F = ChaosElement.from_kernel(f)
        P = multiply(F, conjugate_elem(F))
        wick4 = exact_moment([(F, False), (F, True), (F, False), (F, True)])
        out.append(check("chaos/dual-oracle E|F|^4", wick4, l2_inner(P, P), cfg.identity_tol, m=f.m, n=f.n, d=f.d, seed=cs))
        iso = math.factorial(f.m) * math.factorial(f.n) * norm(f) ** 2
        out.append(check("chaos/isometry", exact_moment([(F, False), (F, True)]), iso, cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs))
        out.append(check("chaos/centering", 0.0, exact_moment([(F, False)]), cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs, mode="abs"))
    rng = case_rng(seed, 10_000)
    f = symmetrize(random_kernel(2, 1, 1, rng))
    exact = exact_moment([(ChaosElement.from_kernel(f), False), (ChaosElement.from_kernel(f), True)]).real
    est, se = mc_estimate(f, "m2", cfg.mc_draws, seed)
    out.append(check("chaos/monte-carlo E|F|^2 (5 s.e.)", exact, est, cfg.mc_bound * se, m=1, n=1, d=2, seed=seed, mode="abs"))
    return out


MALLIAVIN_GRADES = ((1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2))


def suite_malliavin(seed: int, cfg: VerifyConfig) -> list[VerificationReport]:
    out = []
    idx = 0
    for d in (1, 2, 3):
        for g in MALLIAVIN_GRADES:
            rng = case_rng(seed, 1000 + idx)
            idx += 1
            m, n = g
            F = _rand_elem(rng, d, m, n)
            DF, DbF = mall_D(F), mall_Dbar(F)
            # derivatives against Wirtinger finite differences
            worst_d = worst_db = (0.0, 0j, 0j)
            for _ in range(cfg.samples):
                s = GaussianSample(d, complex_normals(rng, (d,)))
                for k in range(d):
                    fz, fzb = wirtinger_fd(F, s, k)
                    a, b = evaluate(DF[k], s), evaluate(DbF[k], s)
                    if abs(a - fz) >= worst_d[0]:
                        worst_d = (abs(a - fz), a, fz)
                    if abs(b - fzb) >= worst_db[0]:
                        worst_db = (abs(b - fzb), b, fzb)
            out.append(check("malliavin/D vs Wirtinger fd", worst_d[1], worst_d[2], cfg.fd_tol, m=m, n=n, d=d, seed=seed, mode="abs"))
            out.append(check("malliavin/Dbar vs Wirtinger fd", worst_db[1], worst_db[2], cfg.fd_tol, m=m, n=n, d=d, seed=seed, mode="abs"))
            f = F.kernel(m, n)
            out.append(check_flag("malliavin/L eigenrelation", _eigen_ok(ou_L(F), f, m), m=m, n=n, d=d, seed=seed))
            out.append(check_flag("malliavin/Lbar eigenrelation", _eigen_ok(ou_Lbar(F), f, n), m=m, n=n, d=d, seed=seed))
            # integration by parts: E[Z_k conj F] = E[conj (DF)_k]
            for k in range(d):
                Zk = ChaosElement.from_kernel(basis_kernel(d, [k], []))
                lhs = exact_moment([(Zk, False), (F, True)])
                rhs = exact_moment([(DF[k], True)])
                out.append(check(f"malliavin/integration-by-parts k={k}", lhs, rhs, cfg.oracle_tol, m=m, n=n, d=d, seed=seed))
            # duality with a second element of mixed grades
            G = _rand_elem(rng, d, *MALLIAVIN_GRADES[(idx * 3) % len(MALLIAVIN_GRADES)]) + F
            DG, DbG = mall_D(G), mall_Dbar(G)
            lhs = exact_moment([(ou_L(G), False), (F, True)])
            rhs = sum(exact_moment([(DG[k], False), (DF[k], True)]) for k in range(d))
            out.append(check("malliavin/duality L", lhs, rhs, cfg.oracle_tol, m=m, n=n, d=d, seed=seed))
            rhs_h = exact_moment([(h_inner(DG, DF), False)])
            out.append(check("malliavin/duality L (h_inner)", lhs, rhs_h, cfg.oracle_tol, m=m, n=n, d=d, seed=seed))
            lhs = exact_moment([(ou_Lbar(G), False), (F, True)])
            rhs = sum(exact_moment([(DbG[k], False), (DbF[k], True)]) for k in range(d))
            out.append(check("malliavin/duality Lbar", lhs, rhs, cfg.oracle_tol, m=m, n=n, d=d, seed=seed))
            # conjugation identity: Dbar(conj F) = conj(D F)
            Dbc = mall_Dbar(conjugate_elem(F))
            s = complex_normals(rng, (cfg.samples, d))
            err = max(
                float(np.max(np.abs(evaluate(Dbc[k], s) - np.conj(evaluate(DF[k], s))))) for k in range(d)
            )
            out.append(check("malliavin/conjugation Dbar(conj F)", 0.0, err, cfg.oracle_tol * 100, m=m, n=n, d=d, seed=seed, mode="abs"))
            if m >= 1:
                out.extend(_step_identities(F, f, d, seed, cfg))
            out.append(_product_rule(F, d, rng, seed, cfg))
    return out


def _eigen_ok(LF: ChaosElement, f: KernelTensor, eigenvalue: int) -> bool:
    k = LF.kernel(f.m, f.n)
    if eigenvalue == 0:
        return k is None
    return set(LF.grades) == {f.grade} and np.array_equal(k.entries, eigenvalue * f.entries)


def _step_identities(F, f, d, seed, cfg):
    m, n = f.m, f.n
    l = m + n
    h = conj_flip(f)
    DF = mall_D(F)
    DFb = mall_D(conjugate_elem(F))
    e2 = exact_moment([(F, False), (F, True)]).real
    ef2 = exact_moment([(F, False), (F, False)])
    lhs1 = sum(exact_moment([(F, False), (F, True), (DF[k], False), (DF[k], True)]) for k in range(d)) / m
    rhs1 = e2**2 + sum(
        math.factorial(l - r) ** 2 * inner(build_theta(f, h, r), build_psi(f, h, r)) for r in range(1, l)
    )
    lhs2 = sum(exact_moment([(DF[k], False), (DFb[k], True), (F, True), (F, True)]) for k in range(d)) / m
    rhs2 = abs(ef2) ** 2 + sum(
        math.factorial(2 * m - r) * math.factorial(2 * n - r) * inner(build_varsigma(f, r), build_varphi(f, r))
        for r in range(1, ff_top(m, n) + 1)
    )
    return [
        check("malliavin/step1 (1/m)E[|F|^2 ||DF||^2]", lhs1, rhs1, cfg.identity_tol, m=m, n=n, d=d, seed=seed),
        check("malliavin/step2 (1/m)E[<DF,DFbar> conj(F)^2]", lhs2, rhs2, cfg.identity_tol, m=m, n=n, d=d, seed=seed),
    ]


def product_rule_sides(F: ChaosElement):
    """``D(conj(F) F^2)`` and ``2|F|^2 DF + F^2 D(conj F)`` as vector chaos."""
    Fb = conjugate_elem(F)
    F2 = multiply(F, F)
    left = mall_D(multiply(F2, Fb))
    right = mall_D(F).scaled_by(multiply(F, Fb)) * 2 + mall_D(Fb).scaled_by(F2)
    return left, right


def _product_rule(F, d, rng, seed, cfg):
    left, right = product_rule_sides(F)
    z = complex_normals(rng, (cfg.samples, d))
    worst = (0.0, 0j, 0j)
    for k in range(d):
        a, b = evaluate(left[k], z), evaluate(right[k], z)
        rel = np.abs(a - b) / np.maximum(1, np.abs(a))
        j = int(np.argmax(rel))
        if rel[j] >= worst[0]:
            worst = (rel[j], a[j], b[j])
    m, n = max(F.grades)
    return check("malliavin/product rule D(conj(F) F^2)", worst[1], worst[2], cfg.product_rule_tol, m=m, n=n, d=d, seed=seed)


def suite_identities(seed: int, cfg: VerifyConfig) -> list[VerificationReport]:
    def one(item):
        k, cs, f = item
        g = gap_exact(f)
        rows = [
            check("identities/gap_exact = gap_contractions", g, gap_contractions(f), cfg.identity_tol, m=f.m, n=f.n, d=f.d, seed=cs),
            check_flag("identities/gap nonnegative", g >= -1e-10, m=f.m, n=f.n, d=f.d, seed=cs),
        ]
        if f.m != f.n:
            F = ChaosElement.from_kernel(f)
            rows.append(check("identities/E[F^2] = 0 for m != n", 0.0, exact_moment([(F, False), (F, False)]), cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs, mode="abs"))
        if k < 36:
            rng = case_rng(cs, 1)
            theta = float(rng.uniform(0, 2 * np.pi))
            c = complex(*rng.normal(size=2))
            rows.append(check("identities/phase invariance", g, gap_exact(np.exp(1j * theta) * f), cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs))
            rows.append(check("identities/scaling |c|^4", abs(c) ** 4 * g, gap_exact(c * f), cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs))
            rows.append(check("identities/conjugate-flip invariance", g, gap_exact(conj_flip(f)), cfg.oracle_tol, m=f.m, n=f.n, d=f.d, seed=cs))
        return rows

    return [r for rows in ordered_map(one, identity_corpus(cfg.corpus_size, seed)) for r in rows]


def suite_lemma31(seed: int, cfg: VerifyConfig) -> list[VerificationReport]:
    def one(item):
        _, cs, f = item
        g = gap_exact(f)
        return [
            check("lemma31/expansion a (f⊗f, psi)", g, lemma31_expansion_a(f), cfg.identity_tol, m=f.m, n=f.n, d=f.d, seed=cs),
            check("lemma31/expansion b (f⊗h, varphi)", g, lemma31_expansion_b(f), cfg.identity_tol, m=f.m, n=f.n, d=f.d, seed=cs),
        ]

    return [r for rows in ordered_map(one, identity_corpus(cfg.corpus_size, seed)) for r in rows]


_SUITE_FNS = {
    "hermite": suite_hermite,
    "chaos": suite_chaos,
    "malliavin": suite_malliavin,
    "identities": suite_identities,
    "lemma31": suite_lemma31,
}


def run_verify(suite: str, seed: int, cfg: VerifyConfig | None = None) -> list[VerificationReport]:
    if suite not in _SUITE_FNS:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    return _SUITE_FNS[suite](seed, cfg or VerifyConfig())
