"""Affine parametrisation of the statically admissible nodal stresses.

Every solution of ``B T = Q`` is written ``T = T0 + N alpha`` with ``T0``
the minimum-norm particular solution and the columns of ``N`` an
orthonormal basis of ``ker B``.  Both come from one column-pivoted QR
factorisation of ``B^T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .statics import EquilibriumSystem

MAX_DENSE_UNKNOWNS = 12000


class StaticsError(ValueError):
    """The load cannot be equilibrated with the given supports."""


class ProblemTooLarge(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class NullSpaceRep:
    T0: np.ndarray
    N: np.ndarray
    rank: int
    residual: float

    @property
    def num_unknowns(self) -> int:
        return self.N.shape[0]

    @property
    def dim(self) -> int:
        return self.N.shape[1]

    def stress(self, alpha: np.ndarray | None = None) -> np.ndarray:
        if alpha is None:
            return self.T0.copy()
        return self.T0 + self.N @ alpha


def decompose(system: EquilibriumSystem | tuple, rank_tol: float = 1e-10,
              max_unknowns: int = MAX_DENSE_UNKNOWNS) -> NullSpaceRep:
    """Factor ``B^T P = Q R`` and read off ``T0`` and ``N``.

    Rank is the number of diagonal entries of ``R`` above
    ``rank_tol * |R_00|``.  Raises :class:`StaticsError` if the particular
    solution leaves a residual above ``rank_tol * |Q|`` (up to rounding).
    """
    if isinstance(system, EquilibriumSystem):
        B, load = system.B, system.Q
    else:
        B, load = system
    B = B.toarray() if hasattr(B, "toarray") else np.asarray(B, dtype=float)
    load = np.asarray(load, dtype=float)
    m, n = B.shape
    if n > max_unknowns:
        raise ProblemTooLarge(f"{n} stress unknowns exceed the dense limit {max_unknowns}")
    if m == 0:
        return NullSpaceRep(np.zeros(n), np.eye(n), 0, 0.0)

    Qf, R, perm = sla.qr(B.T, mode="full", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rank_tol * diag[0])) if diag[0] > 0 else 0
    # B[perm] = R^T Q^T; with T = Q1 y the first `rank` rows give R11^T y = load[perm]
    y = sla.solve_triangular(R[:rank, :rank], load[perm][:rank], trans="T", lower=False)
    T0 = Qf[:, :rank] @ y
    N = np.ascontiguousarray(Qf[:, rank:])

    residual = float(np.linalg.norm(B @ T0 - load))
    qnorm = float(np.linalg.norm(load))
    rounding = 64 * np.finfo(float).eps * (np.linalg.norm(B) * np.linalg.norm(T0) + qnorm)
    if residual > max(rank_tol * qnorm, rounding):
        raise StaticsError("load not equilibrable with given supports "
                           f"(residual {residual:.3e}, |Q| {qnorm:.3e})")
    return NullSpaceRep(T0, N, rank, residual)
