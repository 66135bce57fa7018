import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaosforge.harness import gen_diagonal
from chaosforge.moment_identities import (
    IdentityDomainError,
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
    moments,
)
from chaosforge.tensor_core import basis_kernel, conj_flip, inner, random_kernel, sym_contract, symmetrize, zeros

E11 = basis_kernel(1, [0], [0])
E20 = basis_kernel(1, [0, 0], [])
GRADES = [(1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)]


def rand_sym(d, m, n, seed):
    return symmetrize(random_kernel(d, m, n, np.random.default_rng(seed)))


class TestBuilders:
    def test_unit_kernel(self):
        h = conj_flip(E11)
        assert build_psi(E11, h, 1).entries[0, 0] == pytest.approx(2)
        assert build_theta(E11, h, 1).entries[0, 0] == pytest.approx(1)

    def test_pure_unbarred(self):
        h = conj_flip(E20)
        base = sym_contract(E20, h, 1, 0)
        assert build_psi(E20, h, 1).allclose(4 * base)
        assert build_theta(E20, h, 1).allclose(2 * base)

    def test_imaginary_unit(self):
        f = 1j * E11
        e = sym_contract(E11, E11, 1, 0)
        assert build_varsigma(f, 1).allclose(-1 * e)
        assert build_varphi(f, 1).allclose(-2 * e)

    def test_domain_errors(self):
        h = conj_flip(E11)
        with pytest.raises(IdentityDomainError):
            build_psi(E11, h, 0)
        with pytest.raises(IdentityDomainError):
            build_psi(E11, h, 2)
        with pytest.raises(IdentityDomainError):
            build_varphi(E11, 2)
        f02 = basis_kernel(1, [], [0, 0])
        with pytest.raises(IdentityDomainError):
            build_theta(f02, conj_flip(f02), 1)
        with pytest.raises(IdentityDomainError):
            build_varsigma(basis_kernel(1, [], [0]), 1)

    def test_ff_range(self):
        assert ff_top(1, 1) == 1
        assert ff_top(2, 2) == 3
        assert ff_top(2, 1) == 2
        assert ff_top(3, 1) == 2
        assert ff_top(2, 0) == 0

    @pytest.mark.parametrize("m,n", [(2, 1), (1, 2), (3, 1)])
    def test_short_ff_range_misses_the_gap(self, m, n):
        # stopping the varsigma/varphi sum at 2*min(m,n) - 1 leaves a residue when m != n
        f = rand_sym(2, m, n, 3)
        h = conj_flip(f)
        l = m + n
        total = sum(2 * math.factorial(l - r) ** 2 * inner(build_theta(f, h, r), build_psi(f, h, r)) for r in range(1, l))
        short = total + sum(
            math.factorial(2 * m - r) * math.factorial(2 * n - r) * inner(build_varsigma(f, r), build_varphi(f, r))
            for r in range(1, 2 * min(m, n))
        )
        g = gap_exact(f)
        assert abs(short.real - g) > 1e-3 * g
        assert gap_contractions(f) == pytest.approx(g, rel=1e-9)


class TestGap:
    def test_unit_kernel(self):
        m4, m2, f2 = moments(E11)
        assert (m4, m2, f2) == pytest.approx((9, 1, 1))
        assert gap_exact(E11) == pytest.approx(6, abs=1e-10)
        assert gap_contractions(E11) == pytest.approx(6, abs=1e-10)

    def test_pure_unbarred(self):
        assert moments(E20) == pytest.approx((24, 2, 0))
        assert gap_exact(E20) == pytest.approx(16, abs=1e-10)
        assert gap_contractions(E20) == pytest.approx(16, abs=1e-10)

    def test_gaussian(self):
        f = basis_kernel(1, [0], [])
        assert gap_exact(f) == pytest.approx(0, abs=1e-12)
        assert gap_contractions(f) == pytest.approx(0, abs=1e-12)

    def test_phase_on_unit_kernel(self):
        assert gap_contractions(1j * E11) == pytest.approx(6, abs=1e-10)

    def test_diagonal_scaling(self):
        for d in (1, 2, 3, 5):
            assert gap_exact(gen_diagonal(1, 1, d)) == pytest.approx(6 / d, rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("g", GRADES)
    def test_contraction_identity(self, d, g):
        f = rand_sym(d, *g, seed=17 * d + g[0] * 3 + g[1])
        ge = gap_exact(f)
        assert abs(gap_contractions(f) - ge) <= 1e-9 * max(1, abs(ge))

    @given(st.sampled_from(GRADES), st.integers(1, 2), st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
    def test_invariances(self, g, d, seed, theta):
        f = rand_sym(d, *g, seed)
        ge = gap_exact(f)
        assert ge >= -1e-10
        assert gap_exact(np.exp(1j * theta) * f) == pytest.approx(ge, rel=1e-10)
        assert gap_exact(conj_flip(f)) == pytest.approx(ge, rel=1e-10)
        c = 0.7 - 1.3j
        assert gap_exact(c * f) == pytest.approx(abs(c) ** 4 * ge, rel=1e-10)

    @pytest.mark.parametrize("g", [(2, 1), (1, 2), (2, 0)])
    def test_second_moment_vanishes_off_diagonal(self, g):
        assert abs(moments(rand_sym(2, *g, 5))[2]) <= 1e-12


class TestLemma:
    def test_unit_kernel(self):
        assert lemma31_expansion_a(E11) == pytest.approx(6)
        assert lemma31_expansion_b(E11) == pytest.approx(6)

    def test_pure_unbarred(self):
        assert lemma31_expansion_a(E20) == pytest.approx(16)
        assert lemma31_expansion_b(E20) == pytest.approx(16)

    def test_zero_kernel(self):
        z = zeros(2, 1, 1)
        assert lemma31_expansion_a(z) == 0
        assert lemma31_expansion_b(z) == 0

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("g", GRADES)
    def test_both_expansions(self, d, g):
        f = rand_sym(d, *g, seed=101 * d + 7 * g[0] + g[1])
        ge = gap_exact(f)
        for val in (lemma31_expansion_a(f), lemma31_expansion_b(f)):
            assert abs(val - ge) <= 1e-9 * max(1, abs(ge))

    @pytest.mark.parametrize("g", GRADES)
    def test_bound(self, g):
        f = rand_sym(2, *g, seed=9)
        assert gap_exact(f) <= lemma31_bound(contraction_profile(f)) * (1 + 1e-9)


class TestProfile:
    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("g", [(1, 1), (2, 1), (2, 2)])
    def test_diagonal_kernel(self, d, g):
        p = contraction_profile(gen_diagonal(*g, d))
        ff = p.values("ff")
        assert ff and all(v**2 == pytest.approx(1 / d, abs=1e-12) for v in ff)

    def test_unit_norms_in_one_dimension(self):
        p = contraction_profile(basis_kernel(1, [0, 0], [0]))
        vals = p.values("ff") + p.values("fh") + p.values("ff_sym") + p.values("fh_sym")
        assert vals and all(v == pytest.approx(1) for v in vals)

    def test_absent_entries(self):
        p = contraction_profile(rand_sym(2, 2, 0, 1))
        assert all(e.ff is None and e.fh is not None for e in p.entries.values())
        assert set(p.entries) == {(1, 0)}

    @given(st.sampled_from(GRADES), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_sym_dominated(self, g, d, seed):
        assert contraction_profile(rand_sym(d, *g, seed)).sym_dominated()

    def test_phase_invariance(self):
        f = rand_sym(2, 2, 1, 4)
        a = contraction_profile(f)
        b = contraction_profile(np.exp(0.9j) * f)
        for fam in ("ff", "fh", "ff_sym", "fh_sym"):
            assert np.allclose(a.values(fam), b.values(fam), rtol=1e-10)
