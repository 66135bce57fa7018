"""Malliavin derivatives and Ornstein-Uhlenbeck operators on chaos decompositions.

All operators act spectrally: D removes an unbarred slot, Dbar a barred
slot, and L / Lbar multiply grade (m, n) by m / n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chaos_engine import (
    ChaosElement,
    DimensionMismatchError,
    GaussianSample,
    conjugate_elem,
    evaluate,
    multiply,
)
from .tensor_core import KernelTensor

FD_STEP = 1e-5


@dataclass(frozen=True)
class VectorChaos:
    """H-valued random variable ``sum_k components[k] e_k``.

    For ``mall_Dbar`` output the basis vectors are understood as conjugated;
    in coordinates the layout is identical.
    """

    d: int
    components: tuple[ChaosElement, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.d or any(c.d != self.d for c in comps):
            raise DimensionMismatchError("vector components must number d and share d")
        object.__setattr__(self, "components", comps)

    def __getitem__(self, k: int) -> ChaosElement:
        return self.components[k]

    def __add__(self, other: VectorChaos) -> VectorChaos:
        return VectorChaos(self.d, tuple(a + b for a, b in zip(self.components, other.components)))

    def __mul__(self, c) -> VectorChaos:
        return VectorChaos(self.d, tuple(u * c for u in self.components))

    __rmul__ = __mul__

    def scaled_by(self, G: ChaosElement) -> VectorChaos:
        """Pointwise product with a scalar chaos element."""
        return VectorChaos(self.d, tuple(multiply(G, u) for u in self.components))

    def evaluate(self, s) -> np.ndarray:
        return np.array([evaluate(u, s) for u in self.components])


def _slot_removal(F: ChaosElement, barred: bool) -> VectorChaos:
    comps: list[dict] = [{} for _ in range(F.d)]
    for (m, n), f in F.grades.items():
        count = n if barred else m
        if count == 0:
            continue
        axis = m + n - 1 if barred else m - 1
        grade = (m, n - 1) if barred else (m - 1, n)
        for k in range(F.d):
            sub = count * np.take(f.entries, k, axis=axis)
            comps[k][grade] = KernelTensor(F.d, grade[0], grade[1], sub)
    return VectorChaos(F.d, tuple(ChaosElement(F.d, g, symmetrized=True) for g in comps))


def mall_D(F: ChaosElement) -> VectorChaos:
    """``D I_{m,n}(f) = m I_{m-1,n}(f(..., k))`` with the last unbarred slot fixed to ``k``."""
    return _slot_removal(F, barred=False)


def mall_Dbar(F: ChaosElement) -> VectorChaos:
    return _slot_removal(F, barred=True)


def ou_L(F: ChaosElement) -> ChaosElement:
    return ChaosElement(F.d, {(m, n): m * f for (m, n), f in F.grades.items() if m}, symmetrized=True)


def ou_Lbar(F: ChaosElement) -> ChaosElement:
    return ChaosElement(F.d, {(m, n): n * f for (m, n), f in F.grades.items() if n}, symmetrized=True)


def h_inner(u: VectorChaos, v: VectorChaos) -> ChaosElement:
    """Pointwise ``<u, v>_H = sum_k u_k conj(v_k)``."""
    if u.d != v.d:
        raise DimensionMismatchError(f"dimension mismatch: {u.d} vs {v.d}")
    out = ChaosElement.zero(u.d)
    for a, b in zip(u.components, v.components):
        out = out + multiply(a, conjugate_elem(b))
    return out


def wirtinger_fd(F: ChaosElement, s: GaussianSample, k: int, h: float = FD_STEP) -> tuple[complex, complex]:
    """Central-difference Wirtinger pair ``(d/dz_k, d/dzbar_k)`` of ``F`` at ``s``."""
    z = np.array(s.values, dtype=np.complex128)
    e = np.zeros_like(z)
    e[k] = h
    pts = np.stack([z + e, z - e, z + 1j * e, z - 1j * e])
    fp, fm, gp, gm = evaluate(F, pts)
    dx = (fp - fm) / (2 * h)
    dy = (gp - gm) / (2 * h)
    return complex((dx - 1j * dy) / 2), complex((dx + 1j * dy) / 2)
