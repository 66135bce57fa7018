"""Dense kernels over H = C^d with separate unbarred and barred slot groups.

A kernel of grade (m, n) is an array with ``m + n`` axes of length ``d``.
The first ``m`` axes are the unbarred slots (they pair with Z), the last
``n`` axes are the barred slots (they pair with conj(Z)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class ShapeError(ValueError):
    """Entry count or dimensions do not match the declared kernel shape."""


class KernelValidationError(ValueError):
    """Kernel entries are not finite."""


class ContractionArityError(ValueError):
    """Requested contraction pairs more slots than the operands have."""


@dataclass(frozen=True, eq=False)
class KernelTensor:
    d: int
    m: int
    n: int
    entries: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ShapeError(f"dimension must be positive, got d={self.d}")
        if self.m < 0 or self.n < 0:
            raise ShapeError(f"slot counts must be nonnegative, got ({self.m}, {self.n})")
        arr = np.asarray(self.entries, dtype=np.complex128)
        if arr.size != self.d ** (self.m + self.n):
            raise ShapeError(
                f"expected {self.d ** (self.m + self.n)} entries for "
                f"d={self.d}, (m, n)=({self.m}, {self.n}); got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise KernelValidationError("kernel entries must be finite")
        arr = arr.reshape((self.d,) * (self.m + self.n)).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def order(self) -> int:
        return self.m + self.n

    @property
    def l(self) -> int:
        return self.m + self.n

    @property
    def l_prime(self) -> int:
        return 2 * min(self.m, self.n)

    @property
    def grade(self) -> tuple[int, int]:
        return (self.m, self.n)

    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def __add__(self, other: KernelTensor) -> KernelTensor:
        _check_same_shape(self, other)
        return KernelTensor(self.d, self.m, self.n, self.entries + other.entries)

    def __sub__(self, other: KernelTensor) -> KernelTensor:
        _check_same_shape(self, other)
        return KernelTensor(self.d, self.m, self.n, self.entries - other.entries)

    def __mul__(self, c) -> KernelTensor:
        return KernelTensor(self.d, self.m, self.n, complex(c) * self.entries)

    __rmul__ = __mul__

    def __neg__(self) -> KernelTensor:
        return KernelTensor(self.d, self.m, self.n, -self.entries)

    def allclose(self, other: KernelTensor, rtol=1e-12, atol=1e-14) -> bool:
        if (self.d, self.m, self.n) != (other.d, other.m, other.n):
            return False
        return bool(np.allclose(self.entries, other.entries, rtol=rtol, atol=atol))

    def __repr__(self):
        return f"KernelTensor(d={self.d}, m={self.m}, n={self.n}, norm={norm(self):.6g})"

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "n": self.n,
            "entries": [[float(z.real), float(z.imag)] for z in self.flat()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> KernelTensor:
        pairs = obj["entries"]
        if any(len(p) != 2 for p in pairs):
            raise ShapeError("entries must be [re, im] pairs")
        values = [complex(re, im) for re, im in pairs]
        return make_kernel(int(obj["d"]), int(obj["m"]), int(obj["n"]), values)


def make_kernel(d: int, m: int, n: int, entries) -> KernelTensor:
    """Build a kernel from a flat (row-major, last index fastest) entry array.

    No symmetrization is applied.
    """
    arr = np.asarray(entries, dtype=np.complex128).reshape(-1)
    return KernelTensor(d, m, n, arr)


def zeros(d: int, m: int, n: int) -> KernelTensor:
    return KernelTensor(d, m, n, np.zeros(d ** (m + n), dtype=np.complex128))


def basis_kernel(d: int, alpha, beta, value=1.0) -> KernelTensor:
    """``value * e_alpha_1 ⊗ ... ⊗ ē_beta_1 ⊗ ...`` with 0-based indices."""
    alpha, beta = tuple(alpha), tuple(beta)
    arr = np.zeros((d,) * (len(alpha) + len(beta)), dtype=np.complex128)
    arr[alpha + beta] = value
    return KernelTensor(d, len(alpha), len(beta), arr)


def random_kernel(d: int, m: int, n: int, rng: np.random.Generator) -> KernelTensor:
    """Kernel with iid standard complex Gaussian entries (not symmetrized)."""
    size = d ** (m + n)
    z = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)
    return make_kernel(d, m, n, z)


def _check_same_shape(a: KernelTensor, b: KernelTensor):
    if (a.d, a.m, a.n) != (b.d, b.m, b.n):
        raise ShapeError(
            f"shape mismatch: (d={a.d}, {a.m}, {a.n}) vs (d={b.d}, {b.m}, {b.n})"
        )


@lru_cache(maxsize=None)
def occupations(d: int, m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Occupation patterns of all multi-indices (alpha; beta).

    Returns ``(inverse, a_counts, b_counts)``: ``a_counts[p, c]`` counts the
    occurrences of coordinate ``c`` among the unbarred indices of pattern
    ``p`` (likewise ``b_counts`` for barred), and ``inverse`` maps each flat
    multi-index to its pattern. Two multi-indices share a pattern exactly
    when a slot permutation within each group maps one to the other.
    """
    size = d ** (m + n)
    idx = np.indices((d,) * (m + n)).reshape(m + n, size)
    counts = np.zeros((2 * d, size), dtype=np.int64)
    cols = np.arange(size)
    for s in range(m + n):
        offset = 0 if s < m else d
        np.add.at(counts, (idx[s] + offset, cols), 1)
    base = max(m, n) + 1
    keys = (base ** np.arange(2 * d, dtype=np.int64)) @ counts
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    pat = counts[:, first].T
    a, b = np.ascontiguousarray(pat[:, :d]), np.ascontiguousarray(pat[:, d:])
    inverse = inverse.reshape(-1)
    for arr in (inverse, a, b):
        arr.setflags(write=False)
    return inverse, a, b


def orbit_sums(flat: np.ndarray, inverse: np.ndarray, count: int) -> np.ndarray:
    re = np.bincount(inverse, weights=flat.real, minlength=count)
    im = np.bincount(inverse, weights=flat.imag, minlength=count)
    return re + 1j * im


def symmetrize(K: KernelTensor) -> KernelTensor:
    """Average over the m! * n! permutations acting within each slot group.

    Computed as the mean over each permutation orbit (occupation pattern),
    which equals the permutation average.
    """
    if K.m <= 1 and K.n <= 1:
        return K
    inv, a, _ = occupations(K.d, K.m, K.n)
    sums = orbit_sums(K.flat(), inv, len(a))
    sizes = np.bincount(inv, minlength=len(a))
    return KernelTensor(K.d, K.m, K.n, (sums / sizes)[inv])


def conj_flip(K: KernelTensor) -> KernelTensor:
    """Kernel of the conjugated integral: ``H[beta; alpha] = conj(K[alpha; beta])``."""
    axes = tuple(range(K.m, K.m + K.n)) + tuple(range(K.m))
    return KernelTensor(K.d, K.n, K.m, np.conj(np.transpose(K.entries, axes)))


def contract(A: KernelTensor, B: KernelTensor, i: int, j: int) -> KernelTensor:
    """Plain (unconjugated) contraction ``A ⊗_{i,j} B``.

    The last ``i`` unbarred slots of ``A`` are summed against the last ``i``
    barred slots of ``B``; the last ``j`` barred slots of ``A`` against the
    last ``j`` unbarred slots of ``B``. Result slots are ordered as
    (A unbarred, B unbarred ; A barred, B barred).
    """
    if A.d != B.d:
        raise ShapeError(f"dimension mismatch: {A.d} vs {B.d}")
    if not (0 <= i <= min(A.m, B.n)) or not (0 <= j <= min(A.n, B.m)):
        raise ContractionArityError(
            f"(i, j)=({i}, {j}) out of range for grades {A.grade} and {B.grade}"
        )
    # label layout: A_u | A_b | B_u | B_b, then tie contracted labels together
    a_u = list(range(A.m))
    a_b = list(range(A.m, A.m + A.n))
    off = A.m + A.n
    b_u = list(range(off, off + B.m))
    b_b = list(range(off + B.m, off + B.m + B.n))
    for k in range(i):
        b_b[B.n - i + k] = a_u[A.m - i + k]
    for k in range(j):
        b_u[B.m - j + k] = a_b[A.n - j + k]
    out = a_u[: A.m - i] + b_u[: B.m - j] + a_b[: A.n - j] + b_b[: B.n - i]
    res = np.einsum(A.entries, a_u + a_b, B.entries, b_u + b_b, out, optimize=True)
    return KernelTensor(A.d, A.m + B.m - i - j, A.n + B.n - i - j, res)


def sym_contract(A: KernelTensor, B: KernelTensor, i: int, j: int) -> KernelTensor:
    return symmetrize(contract(A, B, i, j))


def inner(A: KernelTensor, B: KernelTensor) -> complex:
    """Sum of ``A * conj(B)``; conjugate-linear in ``B``."""
    _check_same_shape(A, B)
    return complex(np.vdot(B.entries, A.entries))


def norm(A: KernelTensor) -> float:
    return float(np.linalg.norm(A.entries.reshape(-1)))
