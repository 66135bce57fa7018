"""Complex Hermite polynomials J_{m,n}(z, rho).

``J_{m,n}`` has degree ``m`` in ``z`` and ``n`` in ``conj(z)``. Values come
from the two-index recursions

    J_{m+1,n} = z J_{m,n} - n rho J_{m,n-1}
    J_{m,n+1} = conj(z) J_{m,n} - m rho J_{m-1,n}

started at ``J_{0,0} = 1``. The closed-form coefficient table is kept as
exact integers and serves as an independent cross-check.

Both evaluation paths accumulate in extended precision (``np.clongdouble``)
and round to complex128 on return; near the zeros of J_{m,n} the closed form
cancels terms up to ~1e5 times larger than its value at m, n = 10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class HermiteDomainError(ValueError):
    pass


@dataclass(frozen=True)
class HermiteIndex:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise HermiteDomainError(f"Hermite indices must be >= 0, got ({self.m}, {self.n})")


def hermite_table(m: int, n: int, z, rho=1.0, order: str = "m-first") -> np.ndarray:
    """All ``J_{a,b}(z, rho)`` for ``a <= m``, ``b <= n``.

    Returns an array of shape ``(m + 1, n + 1) + np.shape(z)``. ``order``
    selects which index is raised first; both give the same values.
    """
    HermiteIndex(m, n)
    if np.any(np.asarray(rho) <= 0):
        raise HermiteDomainError("rho must be positive")
    z = np.asarray(z, dtype=np.complex128).astype(np.clongdouble)
    zb = np.conj(z)
    rho = np.longdouble(rho)
    J = np.zeros((m + 1, n + 1) + z.shape, dtype=np.clongdouble)
    J[0, 0] = 1.0
    if order == "m-first":
        for a in range(m):
            J[a + 1, 0] = z * J[a, 0]
        for b in range(n):
            J[0, b + 1] = zb * J[0, b]
            for a in range(1, m + 1):
                J[a, b + 1] = zb * J[a, b] - a * rho * J[a - 1, b]
    elif order == "n-first":
        for b in range(n):
            J[0, b + 1] = zb * J[0, b]
        for a in range(m):
            J[a + 1, 0] = z * J[a, 0]
            for b in range(1, n + 1):
                J[a + 1, b] = z * J[a, b] - b * rho * J[a, b - 1]
    else:
        raise ValueError(f"unknown recursion order {order!r}")
    return J.astype(np.complex128)


def hermite_eval(m: int, n: int, z, rho=1.0, order: str = "m-first"):
    val = hermite_table(m, n, z, rho, order)[m, n]
    return complex(val) if val.ndim == 0 else val


def hermite_coeffs(m: int, n: int) -> dict[tuple[int, int, int], int]:
    """Closed form as ``{(z power, conj(z) power, rho power): integer coefficient}``.

    J_{m,n} = sum_k (-rho)^k k! C(m,k) C(n,k) z^(m-k) conj(z)^(n-k)
    """
    HermiteIndex(m, n)
    return {
        (m - k, n - k, k): (-1) ** k * math.factorial(k) * math.comb(m, k) * math.comb(n, k)
        for k in range(min(m, n) + 1)
    }


def eval_coeffs(coeffs: dict[tuple[int, int, int], int], z, rho=1.0):
    z = np.asarray(z, dtype=np.complex128).astype(np.clongdouble)
    zb = np.conj(z)
    rho = np.longdouble(rho)
    out = np.zeros_like(z)
    for (p, q, k), c in coeffs.items():
        out = out + np.longdouble(c) * z**p * zb**q * rho**k
    out = out.astype(np.complex128)
    return complex(out) if out.ndim == 0 else out


def hermite_dz(m: int, n: int, z, rho=1.0):
    if m == 0:
        return 0j
    return m * hermite_eval(m - 1, n, z, rho)


def hermite_dzbar(m: int, n: int, z, rho=1.0):
    if n == 0:
        return 0j
    return n * hermite_eval(m, n - 1, z, rho)


def hermite_drho(m: int, n: int, z, rho=1.0):
    if m == 0 or n == 0:
        return 0j
    return -m * n * hermite_eval(m - 1, n - 1, z, rho)
