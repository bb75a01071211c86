"""Hard-core boson chain with nearest-neighbour hopping and a three-body term.

    H = -J sum_i (b+_i b_{i+1} + h.c.) + W sum_i n_{i-1} n_i n_{i+1}

on an open chain of L sites. The local space is the two-level occupation
basis {0, 1}; there is no bosonic cutoff parameter.

Conventions shared by every engine:

* Sites are labelled 1..L in physics-facing APIs; arrays are 0-based.
* A Fock configuration is an integer bitmask with bit ``i - 1`` holding the
  occupation of site ``i``.
* Two-site gates act on the basis (n_left, n_right) in lexicographic order
  00, 01, 10, 11; three-site phase vectors are indexed by
  ``4 * n_left + 2 * n_mid + n_right``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError

#: Largest sector dimension for which a dense Hamiltonian is built.
DENSE_DIM_CAP = 16384


@dataclass(frozen=True)
class ModelParams:
    L: int
    J: float = 1.0
    W: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 3:
            raise ValueError(f"L must be an integer >= 3, got {self.L}")
        if not self.J > 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if not self.W >= 0:
            raise ValueError(f"W must be non-negative, got {self.W}")
        if self.boundary != "open":
            raise ValueError("only open boundaries are supported")

    def with_W(self, W: float) -> "ModelParams":
        return ModelParams(L=self.L, J=self.J, W=W)


@dataclass(frozen=True)
class TwoSiteGate:
    matrix: np.ndarray
    dt: complex


@dataclass(frozen=True)
class ThreeSitePhases:
    phases: np.ndarray
    dt: complex


def hopping_gate(params: ModelParams, dt) -> TwoSiteGate:
    """exp(-i dt h_bond) for one bond, h_bond = -J (b+_i b_{i+1} + h.c.).

    ``dt`` may be complex; ``dt = -1j * tau`` gives the imaginary-time
    propagator exp(-tau h_bond).
    """
    if not np.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    c = np.cos(params.J * dt)
    s = 1j * np.sin(params.J * dt)
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = g[3, 3] = 1.0
    g[1, 1] = g[2, 2] = c
    g[1, 2] = g[2, 1] = s
    return TwoSiteGate(matrix=g, dt=dt)


def interaction_phases(params: ModelParams, dt) -> ThreeSitePhases:
    if not np.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    ph = np.ones(8, dtype=complex)
    ph[7] = np.exp(-1j * params.W * dt)
    return ThreeSitePhases(phases=ph, dt=dt)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x = x >> 1
    return count


def hamiltonian(params: ModelParams, basis) -> sp.csr_matrix:
    """Sparse Hamiltonian on a fixed-N Fock basis (see ``fock.FockBasis``)."""
    if basis.L != params.L:
        raise ValueError(f"basis has L={basis.L}, params have L={params.L}")
    states = basis.states
    dim = len(states)
    rows, cols, vals = [], [], []
    for b in range(params.L - 1):
        pair = (states >> b) & 3
        movable = (pair == 1) | (pair == 2)
        src = np.nonzero(movable)[0]
        dst = np.searchsorted(states, states[src] ^ (3 << b))
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(len(src), -params.J))
    triples = states & (states >> 1) & (states >> 2)
    diag = params.W * _popcount(triples).astype(float)
    rows.append(np.arange(dim))
    cols.append(np.arange(dim))
    vals.append(diag)
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return H.tocsr()


def dense_hamiltonian(params: ModelParams, basis) -> np.ndarray:
    dim = len(basis.states)
    if dim > DENSE_DIM_CAP:
        raise CapacityError(basis.L, basis.N, dim, DENSE_DIM_CAP)
    return hamiltonian(params, basis).toarray()


def hopping_matrix(L: int, J: float) -> np.ndarray:
    h = np.zeros((L, L))
    idx = np.arange(L - 1)
    h[idx, idx + 1] = h[idx + 1, idx] = -J
    return h


def single_particle_matrix(params: ModelParams) -> np.ndarray:
    """Hopping matrix h with H = sum_ij h_ij c+_i c_j (valid for W = 0)."""
    return hopping_matrix(params.L, params.J)


def dispersion(L: int, J: float = 1.0) -> np.ndarray:
    """Single-particle energies -2J cos(k), k = l pi / (L + 1), ascending."""
    k = np.arange(1, L + 1) * np.pi / (L + 1)
    return np.sort(-2.0 * J * np.cos(k))


def mpo(params: ModelParams) -> list[np.ndarray]:
    """Matrix-product operator for H, tensors shaped (wl, wr, s_out, s_in).

    Finite-state layout: 0 = nothing placed yet, 1 = b+ placed (awaits b),
    2 = b placed (awaits b+), 3 = one n, 4 = two n, 5 = term complete.
    """
    eye = np.eye(2)
    bdag = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = bdag.T.copy()
    n = np.diag([0.0, 1.0])
    D = 6
    bulk = np.zeros((D, D, 2, 2))
    bulk[0, 0] = eye
    bulk[0, 1] = bdag
    bulk[0, 2] = b
    bulk[0, 3] = n
    bulk[1, 5] = -params.J * b
    bulk[2, 5] = -params.J * bdag
    bulk[3, 4] = n
    bulk[4, 5] = params.W * n
    bulk[5, 5] = eye
    tensors = [bulk.copy() for _ in range(params.L)]
    tensors[0] = bulk[:1].copy()
    tensors[-1] = bulk[:, 5:].copy()
    return tensors


def half_current_bonds(L: int) -> range:
    """Left sites of the bonds (i, i+1) summed in the half-system current.

    "i > L/2" on an open chain: i = floor(L/2) + 1 .. L - 1.
    """
    return range(L // 2 + 1, L)
