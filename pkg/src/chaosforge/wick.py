"""Exact Gaussian moments by monomial expansion.

For independent standard complex Gaussians, E[Z^p conj(Z)^q] = [p == q] p!
per coordinate, so a polynomial's expectation is read off its monomials.
This path never touches contractions or the product formula.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .chaos_engine import ChaosElement, DimensionMismatchError, occupation_coefficients
from .hermite import hermite_coeffs

MAX_DEGREE = 16

_FACT = np.array([math.factorial(k) for k in range(2 * MAX_DEGREE + 1)], dtype=np.float64)


class DegreeLimitError(ValueError):
    pass


class WickPolynomial:
    """Polynomial in z_1..z_d and their conjugates.

    ``terms`` maps an exponent tuple ``(p_1, q_1, ..., p_d, q_d)`` (powers
    of ``z_c`` and ``conj(z_c)``) to a complex coefficient.
    """

    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms=None):
        self.d = int(d)
        self.terms: dict[tuple[int, ...], complex] = {}
        for key, c in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != 2 * self.d or min(key, default=0) < 0:
                raise ValueError(f"bad exponent tuple {key} for d={self.d}")
            if c != 0:
                self.terms[key] = self.terms.get(key, 0j) + complex(c)

    @classmethod
    def constant(cls, d: int, c: complex) -> WickPolynomial:
        return cls(d, {(0,) * (2 * d): c})

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def conj(self) -> WickPolynomial:
        out = {}
        for key, c in self.terms.items():
            swapped = tuple(key[2 * c_ + 1 - s] for c_ in range(self.d) for s in (0, 1))
            out[swapped] = complex(c).conjugate()
        return WickPolynomial(self.d, out)

    def __add__(self, other: WickPolynomial) -> WickPolynomial:
        _same_d(self, other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0j) + c
        return WickPolynomial(self.d, out)

    def __mul__(self, other) -> WickPolynomial:
        if not isinstance(other, WickPolynomial):
            return WickPolynomial(self.d, {k: complex(other) * c for k, c in self.terms.items()})
        _same_d(self, other)
        out: dict[tuple[int, ...], complex] = defaultdict(complex)
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                out[tuple(a + b for a, b in zip(k1, k2))] += c1 * c2
        return WickPolynomial(self.d, out)

    def evaluate(self, z) -> complex | np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        zz = z.reshape(-1, self.d)
        zb = np.conj(zz)
        out = np.zeros(len(zz), dtype=np.complex128)
        for key, c in self.terms.items():
            term = np.full(len(zz), c, dtype=np.complex128)
            for col in range(self.d):
                p, q = key[2 * col], key[2 * col + 1]
                if p:
                    term *= zz[:, col] ** p
                if q:
                    term *= zb[:, col] ** q
            out += term
        if z.ndim == 1:
            return complex(out[0])
        return out.reshape(z.shape[:-1])

    def __repr__(self):
        return f"WickPolynomial(d={self.d}, terms={len(self.terms)}, degree={self.degree})"


def _same_d(a, b):
    if a.d != b.d:
        raise DimensionMismatchError(f"dimension mismatch: {a.d} vs {b.d}")


def _coordinate_expansion(a: int, b: int) -> list[tuple[int, int, int]]:
    # J_{a,b}(z, 1) as (z power, zbar power, coefficient)
    return [(p, q, c) for (p, q, _k), c in hermite_coeffs(a, b).items()]


def to_polynomial(F: ChaosElement) -> WickPolynomial:
    """Exact monomial expansion of ``F`` through the Hermite closed form."""
    d = F.d
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for f in F.grades.values():
        coef, A, B = occupation_coefficients(f)
        for c0, a_row, b_row in zip(coef, A, B):
            if c0 == 0:
                continue
            factors = [_coordinate_expansion(int(a), int(b)) for a, b in zip(a_row, b_row)]
            for combo in _product(factors):
                key = []
                c = c0
                for p, q, w in combo:
                    key += (p, q)
                    c = c * w
                out[tuple(key)] += c
    return WickPolynomial(d, out)


def _product(factors):
    if not factors:
        yield ()
        return
    head, *rest = factors
    for tail in _product(rest):
        for h in head:
            yield (h,) + tail


def exact_expectation(P: WickPolynomial) -> complex:
    total = 0j
    for key, c in P.terms.items():
        p, q = key[0::2], key[1::2]
        if p == q:
            total += c * math.prod(math.factorial(e) for e in p)
    return total


def _grouped(P: WickPolynomial):
    """Monomials bucketed by charge vector ``p - q``."""
    groups: dict[tuple[int, ...], list] = defaultdict(list)
    for key, c in P.terms.items():
        charge = tuple(key[2 * i] - key[2 * i + 1] for i in range(P.d))
        groups[charge].append((key, c))
    out = {}
    for charge, items in groups.items():
        keys = np.array([k for k, _ in items], dtype=np.int64).reshape(len(items), 2 * P.d)
        coefs = np.array([c for _, c in items], dtype=np.complex128)
        out[charge] = (keys[:, 0::2], coefs)
    return out


def paired_expectation(A: WickPolynomial, B: WickPolynomial) -> complex:
    """``E[A B]`` without forming the product polynomial.

    Monomials pair only when their charges cancel; matched pairs contribute
    prod_c (p_c + p'_c)!.
    """
    _same_d(A, B)
    ga, gb = _grouped(A), _grouped(B)
    total = 0j
    for charge, (pa, ca) in ga.items():
        neg = tuple(-x for x in charge)
        if neg not in gb:
            continue
        pb, cb = gb[neg]
        tot = pa[:, None, :] + pb[None, :, :]
        w = np.prod(_FACT[tot], axis=2)
        total += complex(ca @ w @ cb)
    return total


def exact_moment(factors, max_degree: int = MAX_DEGREE) -> complex:
    """Exact ``E[prod_k G_k]`` with ``G_k = F_k`` or ``conj(F_k)``.

    ``factors`` is a sequence of ``(ChaosElement, conjugate_flag)`` pairs.
    """
    factors = list(factors)
    if not factors:
        return 1 + 0j
    d = factors[0][0].d
    polys = []
    for F, conj in factors:
        if F.d != d:
            raise DimensionMismatchError(f"dimension mismatch: {F.d} vs {d}")
        P = to_polynomial(F)
        polys.append(P.conj() if conj else P)
    total_degree = sum(P.degree for P in polys)
    if total_degree > max_degree:
        raise DegreeLimitError(f"product degree {total_degree} exceeds cap {max_degree}")
    if len(polys) == 1:
        return exact_expectation(polys[0])
    # split into two halves of similar degree, then pair
    order = sorted(range(len(polys)), key=lambda k: -polys[k].degree)
    left, right, dl, dr = [], [], 0, 0
    for k in order:
        if dl <= dr:
            left.append(polys[k])
            dl += polys[k].degree
        else:
            right.append(polys[k])
            dr += polys[k].degree
    A = _prod(left, d)
    B = _prod(right, d)
    return paired_expectation(A, B)


def _prod(polys, d):
    out = WickPolynomial.constant(d, 1.0)
    for P in polys:
        out = out * P
    return out
