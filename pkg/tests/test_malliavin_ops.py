import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaosforge.chaos_engine import (
    ChaosElement,
    GaussianSample,
    complex_normals,
    conjugate_elem,
    evaluate,
    multiply,
    sample_gaussian,
)
from chaosforge.harness import product_rule_sides
from chaosforge.malliavin_ops import (
    VectorChaos,
    h_inner,
    mall_D,
    mall_Dbar,
    ou_L,
    ou_Lbar,
    wirtinger_fd,
)
from chaosforge.tensor_core import basis_kernel, random_kernel
from chaosforge.wick import exact_moment

GRADES = [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2)]


def elem(d, m, n, rng):
    return ChaosElement.from_kernel(random_kernel(d, m, n, rng))


def z_elem(d, k):
    return ChaosElement.from_kernel(basis_kernel(d, [k], []))


class TestDerivatives:
    def test_d_of_z(self):
        DF = mall_D(z_elem(3, 0))
        assert DF[0].constant == 1
        assert DF[1].constant == 0 and DF[2].constant == 0
        assert all(F.degree == 0 for F in DF.components)

    def test_d_of_j11(self, rng):
        DF = mall_D(ChaosElement.from_kernel(basis_kernel(1, [0], [0])))
        s = sample_gaussian(1, rng)
        assert set(DF[0].grades) == {(0, 1)}
        assert evaluate(DF[0], s) == pytest.approx(np.conj(s.values[0]))

    def test_constant(self):
        c = ChaosElement.constant_element(2, 4.0)
        assert all(not u.grades for u in mall_D(c).components)
        assert all(not u.grades for u in mall_Dbar(c).components)

    def test_dbar_examples(self):
        Zb = ChaosElement.from_kernel(basis_kernel(2, [], [0]))
        assert mall_Dbar(Zb)[0].constant == 1
        assert all(not u.grades for u in mall_Dbar(z_elem(2, 0)).components)

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("g", GRADES)
    def test_match_finite_differences(self, rng, d, g):
        F = elem(d, *g, rng)
        DF, DbF = mall_D(F), mall_Dbar(F)
        for _ in range(50):
            s = GaussianSample(d, complex_normals(rng, (d,)))
            for k in range(d):
                fz, fzb = wirtinger_fd(F, s, k)
                assert abs(evaluate(DF[k], s) - fz) <= 1e-6
                assert abs(evaluate(DbF[k], s) - fzb) <= 1e-6

    def test_conjugation_identity(self, rng):
        F = elem(2, 2, 1, rng) + elem(2, 1, 1, rng)
        lhs, rhs = mall_Dbar(conjugate_elem(F)), mall_D(F)
        z = complex_normals(rng, (20, 2))
        for k in range(2):
            assert np.allclose(evaluate(lhs[k], z), np.conj(evaluate(rhs[k], z)), atol=1e-12)


class TestWirtingerFd:
    def test_z_squared(self):
        F = ChaosElement.from_kernel(basis_kernel(1, [0, 0], []))
        fz, fzb = wirtinger_fd(F, GaussianSample(1, [1.0]), 0)
        assert abs(fz - 2) <= 1e-6 and abs(fzb) <= 1e-6

    def test_modulus_squared(self, rng):
        F = multiply(z_elem(1, 0), conjugate_elem(z_elem(1, 0)))
        s = sample_gaussian(1, rng)
        fz, fzb = wirtinger_fd(F, s, 0)
        z = s.values[0]
        assert abs(fz - np.conj(z)) <= 1e-6 and abs(fzb - z) <= 1e-6

    def test_constant(self, rng):
        fz, fzb = wirtinger_fd(ChaosElement.constant_element(2, 1j), sample_gaussian(2, rng), 1)
        assert abs(fz) <= 1e-12 and abs(fzb) <= 1e-12


class TestOU:
    def test_eigenvalues(self, rng):
        f = random_kernel(2, 2, 1, rng)
        F = ChaosElement.from_kernel(f)
        k = F.kernel(2, 1)
        assert np.array_equal(ou_L(F).kernel(2, 1).entries, 2 * k.entries)
        assert np.array_equal(ou_Lbar(F).kernel(2, 1).entries, k.entries)

    def test_constants_vanish(self):
        c = ChaosElement.constant_element(1, 3)
        assert not ou_L(c).grades and not ou_Lbar(c).grades

    @pytest.mark.parametrize("g", GRADES)
    def test_sum_of_eigenvalues(self, rng, g):
        F = elem(2, *g, rng)
        S = ou_L(F) + ou_Lbar(F)
        assert S.kernel(*g).allclose(F.kernel(*g) * sum(g))


class TestHInner:
    def test_unit(self):
        D = mall_D(z_elem(2, 1))
        P = h_inner(D, D)
        assert set(P.grades) == {(0, 0)} and P.constant == 1

    def test_zero(self, rng):
        u = VectorChaos(2, (ChaosElement.zero(2), ChaosElement.zero(2)))
        v = mall_D(elem(2, 2, 1, rng))
        assert not h_inner(u, v).grades

    def test_pointwise(self, rng):
        u, v = mall_D(elem(2, 2, 1, rng)), mall_Dbar(elem(2, 1, 2, rng))
        z = complex_normals(rng, (10, 2))
        want = sum(evaluate(u[k], z) * np.conj(evaluate(v[k], z)) for k in range(2))
        assert np.allclose(evaluate(h_inner(u, v), z), want, atol=1e-11)


class TestOracleIdentities:
    @pytest.mark.parametrize("g", GRADES)
    def test_integration_by_parts(self, rng, g):
        d = 2
        F = elem(d, *g, rng)
        DF = mall_D(F)
        for k in range(d):
            lhs = exact_moment([(z_elem(d, k), False), (F, True)])
            rhs = exact_moment([(DF[k], True)])
            assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))

    @pytest.mark.parametrize("gf,gg", [((1, 1), (1, 1)), ((2, 1), (2, 1)), ((2, 2), (2, 2)), ((1, 2), (0, 1))])
    def test_duality(self, rng, gf, gg):
        d = 2
        F = elem(d, *gf, rng) + elem(d, *gg, rng)
        G = elem(d, *gf, rng) + elem(d, 1, 0, rng)
        lhs = exact_moment([(ou_L(G), False), (F, True)])
        rhs = exact_moment([(h_inner(mall_D(G), mall_D(F)), False)])
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
        lhs = exact_moment([(ou_Lbar(G), False), (F, True)])
        rhs = exact_moment([(h_inner(mall_Dbar(G), mall_Dbar(F)), False)])
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@given(st.integers(1, 3), st.sampled_from(GRADES), st.integers(0, 2**32 - 1))
def test_product_rule_pointwise(d, g, seed):
    rng = np.random.default_rng(seed)
    F = elem(d, *g, rng)
    left, right = product_rule_sides(F)
    z = complex_normals(rng, (50, d))
    for k in range(d):
        a, b = evaluate(left[k], z), evaluate(right[k], z)
        assert np.max(np.abs(a - b) / np.maximum(1, np.abs(a))) <= 1e-8
