"""Fourth-moment gap of a complex multiple integral and its contraction expansions.

For F = I_{m,n}(f) with conj(F) = I_{n,m}(h) the gap

    E|F|^4 - 2 (E|F|^2)^2 - |E F^2|^2

is computed three ways:

* :func:`gap_exact` from the Wick oracle (no contractions involved);
* :func:`gap_contractions` as inner products of the weighted symmetrized
  contractions theta_r, psi_r (built from f ⊗~ h) and varsigma_r, varphi_r
  (built from f ⊗~ f);
* :func:`lemma31_expansion_a` / :func:`lemma31_expansion_b` as sums of
  squared non-symmetrized contraction norms plus squared norms of psi_r or
  varphi_r.

Range conventions verified against the oracle:

* the varsigma/varphi sum runs over every r >= 1 whose grade
  (2m - r, 2n - r) is not (0, 0), i.e. up to l' - 1 when m == n and up to
  l' when m != n;
* the f ⊗ f norms carry the weights C(m,i)C(n,i)C(m,j)C(n,j) and go with
  the psi_r sum, the f ⊗ h norms carry C(m,i)^2 C(n,j)^2 and go with the
  varphi_r sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from math import comb, factorial

from .chaos_engine import ChaosElement
from .tensor_core import KernelTensor, conj_flip, contract, inner, norm, sym_contract, symmetrize, zeros
from .wick import exact_moment

RESIDUE_TOL = 1e-10


class IdentityDomainError(ValueError):
    pass


class ResidueError(ArithmeticError):
    """A quantity that must be real carries a non-negligible imaginary part."""


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > RESIDUE_TOL * max(1.0, abs(z.real)):
        raise ResidueError(f"{what}: imaginary residue {z.imag:.3e} on {z.real:.6e}")
    return z.real


def _pairs_fh(m: int, n: int, r: int):
    return [(i, r - i) for i in range(max(0, r - n), min(m, r) + 1)]


def _pairs_ff(m: int, n: int, r: int):
    k = min(m, n)
    return [(i, r - i) for i in range(max(0, r - k), min(k, r) + 1)]


def ff_top(m: int, n: int) -> int:
    """Largest r in the varsigma/varphi sums."""
    lp = 2 * min(m, n)
    return lp - 1 if m == n else lp


def _weighted_sum(terms, d, grade) -> KernelTensor:
    if not terms:
        return zeros(d, *grade)
    return reduce(lambda a, b: a + b, terms)


def _check_fh_range(f: KernelTensor, r: int):
    if not 1 <= r <= f.l - 1:
        raise IdentityDomainError(f"r={r} outside 1..{f.l - 1} for grade {f.grade}")


def _check_ff_range(f: KernelTensor, r: int):
    top = ff_top(f.m, f.n)
    if not 1 <= r <= top:
        raise IdentityDomainError(f"r={r} outside 1..{top} for grade {f.grade}")


def build_psi(f: KernelTensor, h: KernelTensor, r: int) -> KernelTensor:
    _check_fh_range(f, r)
    m, n = f.m, f.n
    terms = [
        (comb(m, i) ** 2 * comb(n, j) ** 2 * factorial(i) * factorial(j)) * sym_contract(f, h, i, j)
        for i, j in _pairs_fh(m, n, r)
    ]
    return _weighted_sum(terms, f.d, (f.l - r, f.l - r))


def build_theta(f: KernelTensor, h: KernelTensor, r: int) -> KernelTensor:
    _check_fh_range(f, r)
    m, n = f.m, f.n
    if m == 0:
        raise IdentityDomainError("theta_r needs m >= 1")
    terms = [
        (i / m * comb(m, i) ** 2 * comb(n, j) ** 2 * factorial(i) * factorial(j)) * sym_contract(f, h, i, j)
        for i, j in _pairs_fh(m, n, r)
    ]
    return _weighted_sum(terms, f.d, (f.l - r, f.l - r))


def _ff_weight(m, n, i, j) -> int:
    return comb(m, i) * comb(n, i) * comb(n, j) * comb(m, j) * factorial(i) * factorial(j)


def build_varphi(f: KernelTensor, r: int) -> KernelTensor:
    _check_ff_range(f, r)
    m, n = f.m, f.n
    terms = [_ff_weight(m, n, i, j) * sym_contract(f, f, i, j) for i, j in _pairs_ff(m, n, r)]
    return _weighted_sum(terms, f.d, (2 * m - r, 2 * n - r))


def build_varsigma(f: KernelTensor, r: int) -> KernelTensor:
    _check_ff_range(f, r)
    m, n = f.m, f.n
    if m == 0:
        raise IdentityDomainError("varsigma_r needs m >= 1")
    terms = [(i / m * _ff_weight(m, n, i, j)) * sym_contract(f, f, i, j) for i, j in _pairs_ff(m, n, r)]
    return _weighted_sum(terms, f.d, (2 * m - r, 2 * n - r))


# ------------------------------------------------------------------ gaps


def moments(f: KernelTensor) -> tuple[float, float, complex]:
    """Exact ``(E|F|^4, E|F|^2, E F^2)`` for ``F = I_{m,n}(f)``."""
    F = ChaosElement.from_kernel(f)
    m4 = exact_moment([(F, False), (F, True), (F, False), (F, True)])
    m2 = exact_moment([(F, False), (F, True)])
    f2 = exact_moment([(F, False), (F, False)])
    return _real(m4, "E|F|^4"), _real(m2, "E|F|^2"), f2


def gap_exact(f: KernelTensor) -> float:
    m4, m2, f2 = moments(symmetrize(f))
    return m4 - 2 * m2**2 - abs(f2) ** 2


def gap_contractions(f: KernelTensor) -> float:
    f = symmetrize(f)
    if f.l == 0:
        raise IdentityDomainError("gap expansion needs m + n >= 1")
    if f.m == 0:
        # the gap is unchanged by F -> conj(F)
        f = conj_flip(f)
    h = conj_flip(f)
    m, n, l = f.m, f.n, f.l
    total = 0j
    for r in range(1, l):
        total += 2 * factorial(l - r) ** 2 * inner(build_theta(f, h, r), build_psi(f, h, r))
    for r in range(1, ff_top(m, n) + 1):
        total += factorial(2 * m - r) * factorial(2 * n - r) * inner(build_varsigma(f, r), build_varphi(f, r))
    return _real(total, "gap_contractions")


def _ff_pairs_lemma(m: int, n: int):
    k = min(m, n)
    for i in range(k + 1):
        for j in range(k + 1):
            if (i, j) == (0, 0) or (m == n and (i, j) == (m, m)):
                continue
            yield i, j


def _fh_pairs_lemma(m: int, n: int):
    for i in range(m + 1):
        for j in range(n + 1):
            if 0 < i + j < m + n:
                yield i, j


def lemma31_expansion_a(f: KernelTensor) -> float:
    """Gap as f ⊗ f squared norms plus squared norms of psi_r."""
    f = symmetrize(f)
    h = conj_flip(f)
    m, n, l = f.m, f.n, f.l
    w = (factorial(m) * factorial(n)) ** 2
    total = 0.0
    for i, j in _ff_pairs_lemma(m, n):
        total += comb(m, i) * comb(n, i) * comb(m, j) * comb(n, j) * w * norm(contract(f, f, i, j)) ** 2
    for r in range(1, l):
        total += factorial(l - r) ** 2 * norm(build_psi(f, h, r)) ** 2
    return total


def lemma31_expansion_b(f: KernelTensor) -> float:
    """Gap as f ⊗ h squared norms plus squared norms of varphi_r."""
    f = symmetrize(f)
    h = conj_flip(f)
    m, n = f.m, f.n
    w = (factorial(m) * factorial(n)) ** 2
    total = 0.0
    for i, j in _fh_pairs_lemma(m, n):
        total += comb(m, i) ** 2 * comb(n, j) ** 2 * w * norm(contract(f, h, i, j)) ** 2
    for r in range(1, ff_top(m, n) + 1):
        total += factorial(2 * m - r) * factorial(2 * n - r) * norm(build_varphi(f, r)) ** 2
    return total


# --------------------------------------------------------------- profiles


@dataclass(frozen=True)
class ProfileEntry:
    """Contraction norms at one (i, j); ``None`` where the contraction is undefined."""

    ff: float | None
    fh: float | None
    ff_sym: float | None
    fh_sym: float | None


@dataclass(frozen=True)
class ContractionProfile:
    m: int
    n: int
    d: int
    entries: dict[tuple[int, int], ProfileEntry] = field(default_factory=dict)

    @property
    def l(self) -> int:
        return self.m + self.n

    @property
    def l_prime(self) -> int:
        return 2 * min(self.m, self.n)

    def values(self, family: str) -> list[float]:
        return [getattr(e, family) for e in self.entries.values() if getattr(e, family) is not None]

    def max_nonsym(self) -> float:
        return max(self.values("ff") + self.values("fh"), default=0.0)

    def max_sym(self) -> float:
        return max(self.values("ff_sym") + self.values("fh_sym"), default=0.0)

    def sym_dominated(self, slack: float = 1e-12) -> bool:
        """Every symmetrized norm is at most its non-symmetrized counterpart."""
        for e in self.entries.values():
            for s, ns in ((e.ff_sym, e.ff), (e.fh_sym, e.fh)):
                if s is not None and s > ns * (1 + slack) + slack:
                    return False
        return True

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "d": self.d,
            "l": self.l,
            "l_prime": self.l_prime,
            "entries": [
                {"i": i, "j": j, "ff": e.ff, "fh": e.fh, "ff_sym": e.ff_sym, "fh_sym": e.fh_sym}
                for (i, j), e in self.entries.items()
            ],
        }


def contraction_profile(f: KernelTensor) -> ContractionProfile:
    f = symmetrize(f)
    h = conj_flip(f)
    m, n = f.m, f.n
    k = min(m, n)
    entries = {}
    for i in range(m + 1):
        for j in range(n + 1):
            if not 0 < i + j <= m + n - 1:
                continue
            c_fh = contract(f, h, i, j)
            fh, fh_sym = norm(c_fh), norm(symmetrize(c_fh))
            ff = ff_sym = None
            if i <= k and j <= k:
                c_ff = contract(f, f, i, j)
                ff, ff_sym = norm(c_ff), norm(symmetrize(c_ff))
            entries[(i, j)] = ProfileEntry(ff, fh, ff_sym, fh_sym)
    return ContractionProfile(m, n, f.d, entries)


def lemma31_bound(profile: ContractionProfile) -> float:
    """Upper bound on the gap from non-symmetrized norms only.

    Uses expansion (a) with each psi_r bounded by the triangle inequality and
    ||f ⊗~ h|| <= ||f ⊗ h||.
    """
    m, n, l = profile.m, profile.n, profile.l
    w = (factorial(m) * factorial(n)) ** 2
    total = 0.0
    for i, j in _ff_pairs_lemma(m, n):
        e = profile.entries.get((i, j))
        # (i, j) with i + j = l only arises for m == n, where it is excluded
        if e is not None and e.ff is not None:
            total += comb(m, i) * comb(n, i) * comb(m, j) * comb(n, j) * w * e.ff**2
    for r in range(1, l):
        s = sum(
            comb(m, i) ** 2 * comb(n, j) ** 2 * factorial(i) * factorial(j) * profile.entries[(i, j)].fh
            for i, j in _pairs_fh(m, n, r)
        )
        total += factorial(l - r) ** 2 * s**2
    return total
