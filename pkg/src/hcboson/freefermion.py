"""W = 0 engine: one-body correlation matrices of the Jordan-Wigner fermions.

Only observables that are invariant under the Jordan-Wigner mapping are
exposed (site densities and nearest-neighbour currents); boson correlators
with strings are not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import EngineDomainError, IntegrityError
from .model import ModelParams, half_current_bonds, single_particle_matrix

BOUND_TOL = 1e-10


@dataclass(frozen=True)
class CorrelationMatrix:
    """C[i, j] = <c+_i c_j> (0-based indices)."""

    C: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.C.shape[0]

    @property
    def N(self) -> float:
        return float(np.trace(self.C).real)


def _require_free(params: ModelParams):
    if params.W != 0:
        raise EngineDomainError(f"free-fermion engine needs W = 0, got W = {params.W}")


def from_occupations(occ) -> CorrelationMatrix:
    occ = np.asarray(occ)
    if not np.all((occ == 0) | (occ == 1)):
        raise ValueError("occupations must be 0 or 1")
    return CorrelationMatrix(np.diag(occ.astype(complex)))


def ground_state_correlation(params: ModelParams, N: int) -> CorrelationMatrix:
    _require_free(params)
    if not 0 <= N <= params.L:
        raise ValueError(f"need 0 <= N <= L, got N={N}")
    _, vecs = la.eigh(single_particle_matrix(params))
    phi = vecs[:, :N]
    # C_ij = <c+_i c_j> = sum_k conj(phi_ik) phi_jk
    return CorrelationMatrix((phi.conj() @ phi.T).astype(complex))


class FreeEvolver:
    """Caches the single-particle eigenbasis so C(t) is cheap at many times."""

    def __init__(self, params: ModelParams):
        _require_free(params)
        self.params = params
        self.eps, self.vecs = la.eigh(single_particle_matrix(params))

    def unitary(self, t: float) -> np.ndarray:
        # exp(+i h t): C(t) = conj(U_heis) C0 U_heis^T with U_heis = exp(-i h t)
        return (self.vecs * np.exp(1j * self.eps * t)) @ self.vecs.T

    def evolve(self, C0: CorrelationMatrix, t: float) -> CorrelationMatrix:
        if t == 0:
            return CorrelationMatrix(C0.C.copy())
        U = self.unitary(t)
        return CorrelationMatrix(U @ C0.C @ U.conj().T)


def evolve_correlation(C0: CorrelationMatrix, params: ModelParams, t: float) -> CorrelationMatrix:
    return FreeEvolver(params).evolve(C0, t)


def density_from_correlation(C: CorrelationMatrix) -> np.ndarray:
    n = np.diag(C.C).real.copy()
    if n.size and (n.min() < -BOUND_TOL or n.max() > 1 + BOUND_TOL):
        raise IntegrityError(f"density outside [0, 1]: min {n.min():.3e}, max {n.max():.3e}")
    return np.clip(n, 0.0, 1.0)


def half_current_from_correlation(C: CorrelationMatrix, J: float) -> float:
    bonds = np.array(half_current_bonds(C.L)) - 1
    if bonds.size == 0:
        return 0.0
    return float(np.sum(2.0 * J * C.C[bonds, bonds + 1].imag))
