"""Finite-dimensional complex Wiener chaos: kernels, Hermite polynomials,
multiple integrals, Malliavin operators and fourth-moment identities."""

__version__ = "0.1.0"

from .chaos_engine import (
    ChaosElement,
    GaussianSample,
    conjugate_elem,
    evaluate,
    l2_inner,
    multiply,
    sample_gaussian,
)
from .hermite import hermite_coeffs, hermite_dz, hermite_drho, hermite_dzbar, hermite_eval
from .malliavin_ops import VectorChaos, h_inner, mall_D, mall_Dbar, ou_L, ou_Lbar, wirtinger_fd
from .moment_identities import (
    build_psi,
    build_theta,
    build_varphi,
    build_varsigma,
    contraction_profile,
    gap_contractions,
    gap_exact,
    lemma31_expansion_a,
    lemma31_expansion_b,
)
from .tensor_core import (
    KernelTensor,
    conj_flip,
    contract,
    inner,
    make_kernel,
    norm,
    sym_contract,
    symmetrize,
)
from .wick import WickPolynomial, exact_expectation, exact_moment, to_polynomial
