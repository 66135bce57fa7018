"""Finite chaos expansions over H = C^d.

A :class:`ChaosElement` is a finite sum of multiple integrals I_{m,n}(f),
stored as a map from grade ``(m, n)`` to a symmetrized kernel. With
Z_c = Z(e_c) for the standard basis, a kernel evaluates as

    I_{m,n}(f) = sum_{alpha, beta} f[alpha; beta] prod_c J_{a_c, b_c}(Z_c, 1)

where ``a_c`` / ``b_c`` count how often ``c`` occurs in ``alpha`` / ``beta``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hermite import hermite_table
from .tensor_core import (
    KernelTensor,
    ShapeError,
    conj_flip,
    contract,
    inner,
    occupations,
    orbit_sums,
    symmetrize,
)


class DimensionMismatchError(ShapeError):
    pass


# ---------------------------------------------------------------- sampling


def complex_normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals (E|Z|^2 = 1, E Z^2 = 0) via the Marsaglia polar method.

    Each accepted point (u, v) in the unit disc yields the pair
    (u, v) * sqrt(-2 ln s / s), s = u^2 + v^2, used as real and imaginary parts.
    """
    shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
    total = int(np.prod(shape, dtype=np.int64))
    out = np.empty(total, dtype=np.complex128)
    filled = 0
    while filled < total:
        need = total - filled
        # acceptance rate is pi/4; oversample to usually finish in one pass
        batch = int(need * 1.3) + 16
        uv = rng.uniform(-1.0, 1.0, size=(batch, 2))
        s = uv[:, 0] ** 2 + uv[:, 1] ** 2
        ok = (s > 0.0) & (s < 1.0)
        uv, s = uv[ok][:need], s[ok][:need]
        scale = np.sqrt(-np.log(s) / s)  # includes the 1/sqrt(2) normalization
        out[filled : filled + len(s)] = (uv[:, 0] + 1j * uv[:, 1]) * scale
        filled += len(s)
    return out.reshape(shape)


@dataclass(frozen=True, eq=False)
class GaussianSample:
    d: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128).reshape(-1)
        if vals.shape != (self.d,):
            raise ShapeError(f"expected {self.d} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", vals)


def sample_gaussian(d: int, rng: np.random.Generator) -> GaussianSample:
    return GaussianSample(d, complex_normals(rng, (d,)))


# ----------------------------------------------------------- chaos elements


class ChaosElement:
    """Finite chaos decomposition ``sum_{(m,n)} I_{m,n}(f_{m,n})``.

    Kernels are symmetrized on construction unless ``symmetrized=True`` is
    passed by a caller that already guarantees it.
    """

    __slots__ = ("d", "grades")

    def __init__(self, d: int, grades=None, *, symmetrized: bool = False):
        self.d = int(d)
        out = {}
        for (m, n), k in (grades or {}).items():
            if k.d != self.d:
                raise DimensionMismatchError(f"kernel has d={k.d}, element has d={self.d}")
            if (k.m, k.n) != (m, n):
                raise ShapeError(f"kernel grade {k.grade} filed under {(m, n)}")
            out[(m, n)] = k if symmetrized else symmetrize(k)
        self.grades: dict[tuple[int, int], KernelTensor] = dict(sorted(out.items()))

    @classmethod
    def from_kernel(cls, f: KernelTensor) -> ChaosElement:
        return cls(f.d, {f.grade: f})

    @classmethod
    def constant_element(cls, d: int, c: complex) -> ChaosElement:
        return cls(d, {(0, 0): KernelTensor(d, 0, 0, np.array(complex(c)))}, symmetrized=True)

    @classmethod
    def zero(cls, d: int) -> ChaosElement:
        return cls(d)

    @property
    def constant(self) -> complex:
        k = self.grades.get((0, 0))
        return 0j if k is None else complex(k.entries[()])

    def kernel(self, m: int, n: int) -> KernelTensor | None:
        return self.grades.get((m, n))

    @property
    def degree(self) -> int:
        return max((m + n for m, n in self.grades), default=0)

    def __add__(self, other: ChaosElement) -> ChaosElement:
        _same_d(self, other)
        out = dict(self.grades)
        for g, k in other.grades.items():
            out[g] = out[g] + k if g in out else k
        return ChaosElement(self.d, out, symmetrized=True)

    def __neg__(self) -> ChaosElement:
        return self * -1

    def __sub__(self, other: ChaosElement) -> ChaosElement:
        return self + (-other)

    def __mul__(self, c) -> ChaosElement:
        if isinstance(c, ChaosElement):
            return multiply(self, c)
        return ChaosElement(self.d, {g: complex(c) * k for g, k in self.grades.items()}, symmetrized=True)

    def __rmul__(self, c) -> ChaosElement:
        return self * c

    def __repr__(self):
        return f"ChaosElement(d={self.d}, grades={list(self.grades)})"

    def to_json(self) -> dict:
        c = self.constant
        return {
            "d": self.d,
            "grades": [
                {"m": m, "n": n, "kernel": k.to_json()}
                for (m, n), k in self.grades.items()
                if (m, n) != (0, 0)
            ],
            "constant": [c.real, c.imag],
        }

    @classmethod
    def from_json(cls, obj: dict) -> ChaosElement:
        d = int(obj["d"])
        grades = {}
        for g in obj.get("grades", []):
            k = KernelTensor.from_json(g["kernel"])
            if (k.m, k.n) != (int(g["m"]), int(g["n"])):
                raise ShapeError("grade label does not match kernel shape")
            grades[k.grade] = k
        re, im = obj.get("constant", [0.0, 0.0])
        if re or im:
            grades[(0, 0)] = KernelTensor(d, 0, 0, np.array(complex(re, im)))
        return cls(d, grades)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _same_d(F: ChaosElement, G: ChaosElement):
    if F.d != G.d:
        raise DimensionMismatchError(f"dimension mismatch: {F.d} vs {G.d}")


# ---------------------------------------------------------------- evaluate


def occupation_coefficients(f: KernelTensor) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kernel collapsed onto occupation patterns: ``(coef, a_counts, b_counts)``."""
    inv, a, b = occupations(f.d, f.m, f.n)
    return orbit_sums(f.flat(), inv, len(a)), a, b


def evaluate(F: ChaosElement, s) -> complex | np.ndarray:
    """Value of ``F`` at a sample, or at a batch of shape ``(N, d)``."""
    if isinstance(s, GaussianSample):
        if s.d != F.d:
            raise DimensionMismatchError(f"sample has d={s.d}, element has d={F.d}")
        return complex(_evaluate_batch(F, s.values[None, :])[0])
    z = np.asarray(s, dtype=np.complex128)
    if z.shape[-1] != F.d:
        raise DimensionMismatchError(f"sample has d={z.shape[-1]}, element has d={F.d}")
    flat = z.reshape(-1, F.d)
    return _evaluate_batch(F, flat).reshape(z.shape[:-1])


def _evaluate_batch(F: ChaosElement, z: np.ndarray) -> np.ndarray:
    N = z.shape[0]
    out = np.zeros(N, dtype=np.complex128)
    if not F.grades:
        return out
    M = max(m for m, _ in F.grades)
    Nb = max(n for _, n in F.grades)
    # table[a, b, sample, coordinate]
    table = hermite_table(M, Nb, z, 1.0)
    cols = np.arange(F.d)
    for f in F.grades.values():
        coef, a, b = occupation_coefficients(f)
        # prod over coordinates of J_{a_c, b_c}(Z_c, 1) for each pattern
        vals = table[a[:, None, :], b[:, None, :], np.arange(N)[None, :, None], cols[None, None, :]]
        out += coef @ np.prod(vals, axis=2)
    return out


# ---------------------------------------------------------------- products


def product_coefficient(m: int, n: int, p: int, q: int, i: int, j: int) -> int:
    """Weight of ``I(f ⊗_{i,j} g)`` in ``I_{m,n}(f) I_{p,q}(g)``."""
    return (
        math.comb(m, i) * math.comb(q, i) * math.factorial(i)
        * math.comb(n, j) * math.comb(p, j) * math.factorial(j)
    )


def multiply(F: ChaosElement, G: ChaosElement) -> ChaosElement:
    """Product via the complex product formula.

    I_{m,n}(f) I_{p,q}(g) = sum_{i <= m∧q, j <= n∧p} C(m,i)C(q,i)i! C(n,j)C(p,j)j!
                            I_{m+p-i-j, n+q-i-j}(f ⊗_{i,j} g)
    """
    _same_d(F, G)
    acc: dict[tuple[int, int], np.ndarray] = {}
    for (m, n), f in F.grades.items():
        for (p, q), g in G.grades.items():
            for i in range(min(m, q) + 1):
                for j in range(min(n, p) + 1):
                    c = contract(f, g, i, j)
                    w = product_coefficient(m, n, p, q, i, j)
                    if c.grade in acc:
                        acc[c.grade] = acc[c.grade] + w * c.entries
                    else:
                        acc[c.grade] = w * c.entries
    kernels = {g: KernelTensor(F.d, g[0], g[1], arr) for g, arr in acc.items()}
    return ChaosElement(F.d, kernels)


def conjugate_elem(F: ChaosElement) -> ChaosElement:
    return ChaosElement(F.d, {(n, m): conj_flip(k) for (m, n), k in F.grades.items()}, symmetrized=True)


def l2_inner(F: ChaosElement, G: ChaosElement) -> complex:
    """``E[F conj(G)]`` from the isometry ``m! n! <f, g>`` on matching grades."""
    _same_d(F, G)
    total = 0j
    for (m, n), f in F.grades.items():
        g = G.grades.get((m, n))
        if g is not None:
            total += math.factorial(m) * math.factorial(n) * inner(f, g)
    return total
