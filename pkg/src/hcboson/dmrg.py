"""Two-site DMRG ground-state search at fixed particle number."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from . import mps as _mps
from .errors import ConvergenceError
from .model import ModelParams, mpo

DENSE_EIG_DIM = 64


class GroundStateResult(NamedTuple):
    energy: float
    state: _mps.MpsState
    history: list


def spread_occupations(L: int, N: int) -> np.ndarray:
    """N particles spread as evenly as possible over L sites."""
    occ = np.zeros(L, dtype=int)
    if N:
        occ[np.floor((np.arange(N) + 0.5) * L / N).astype(int)] = 1
    return occ


def _lowest(matvec, v0: np.ndarray):
    n = v0.size
    if n <= DENSE_EIG_DIM:
        H = np.column_stack([matvec(e) for e in np.eye(n, dtype=complex)])
        H = 0.5 * (H + H.conj().T)
        w, v = la.eigh(H, subset_by_index=[0, 0])
        return float(w[0]), v[:, 0]
    op = spla.LinearOperator((n, n), matvec=matvec, dtype=complex)
    w, v = spla.eigsh(op, k=1, which="SA", v0=v0, tol=1e-13, ncv=min(n, 20))
    return float(w[0]), v[:, 0]


def ground_state_search(
    params: ModelParams,
    N: int,
    chi_max: int = _mps.CHI_MAX,
    tol: float = 1e-10,
    svd_eps: float = 1e-10,
    max_sweeps: int = 40,
    min_sweeps: int = 2,
) -> GroundStateResult:
    """Variational ground state of H in the N-particle sector.

    Each sweep goes left to right and back; the energy recorded per sweep is
    the last local eigenvalue. Converged when two consecutive sweep energies
    differ by less than ``tol``.
    """
    L = params.L
    if not 0 <= N <= L:
        raise ValueError(f"need 0 <= N <= L, got N={N}")
    state = _mps.from_occupations(spread_occupations(L, N), chi_max=chi_max, svd_eps=svd_eps)
    Ws = mpo(params)
    _mps.canonicalize(state, 1)
    T = state.tensors
    left = [None] * (L + 1)
    right = [None] * (L + 1)
    left[0] = np.ones((1, 1, 1))
    right[L] = np.ones((1, 1, 1))
    for k in range(L - 1, 0, -1):
        right[k] = _grow_right(right[k + 1], T[k], Ws[k])

    history = []
    energy = np.inf
    for sweep in range(max_sweeps):
        for i in range(L - 1):
            energy = _update(state, Ws, left, right, i, "right")
            left[i + 1] = _grow_left(left[i], T[i], Ws[i])
        for i in range(L - 2, -1, -1):
            energy = _update(state, Ws, left, right, i, "left")
            right[i + 1] = _grow_right(right[i + 2], T[i + 1], Ws[i + 1])
        history.append(energy)
        if sweep + 1 >= min_sweeps and abs(history[-1] - history[-2]) < tol:
            state.discarded_weight = 0.0
            state.step_discarded = 0.0
            return GroundStateResult(energy, state, history)
    raise ConvergenceError(f"DMRG not converged after {max_sweeps} sweeps", history)


# Environment index order: (bra bond, mpo bond, ket bond).
# MPO tensors: (left, right, out, in).


def _grow_left(Lenv, A, W):
    X = np.tensordot(Lenv, A, axes=(2, 0))  # x w s b
    X = np.tensordot(X, W, axes=([1, 2], [0, 3]))  # x b v u
    X = np.tensordot(X, A.conj(), axes=([0, 3], [0, 1]))  # b v y
    return X.transpose(2, 1, 0)


def _grow_right(Renv, B, W):
    X = np.tensordot(B, Renv, axes=(2, 2))  # e t c z
    X = np.tensordot(X, W, axes=([1, 3], [3, 1]))  # e c w y
    X = np.tensordot(X, B.conj(), axes=([1, 3], [2, 1]))  # e w d
    return X.transpose(2, 1, 0)


def _apply_heff(Lenv, W1, W2, Renv, theta):
    X = np.tensordot(Lenv, theta, axes=(2, 0))  # x w s t b
    X = np.tensordot(X, W1, axes=([1, 2], [0, 3]))  # x t b v u
    X = np.tensordot(X, W2, axes=([3, 1], [0, 3]))  # x b u z y
    return np.tensordot(X, Renv, axes=([3, 1], [1, 2]))  # x u y c


def _update(state, Ws, left, right, i, direction) -> float:
    T = state.tensors
    A, B = T[i], T[i + 1]
    Dl, Dr = A.shape[0], B.shape[2]
    qa, qb = _mps._bond_q(state, i), _mps._bond_q(state, i + 2)
    allowed = (qa[:, None, None, None] + np.arange(2)[:, None, None] + np.arange(2)[:, None] - qb) == 0
    idx = np.nonzero(allowed.reshape(-1))[0]
    Lenv, Renv, W1, W2 = left[i], right[i + 2], Ws[i], Ws[i + 1]

    def matvec(x):
        full = np.zeros(Dl * 4 * Dr, dtype=complex)
        full[idx] = np.ravel(x)
        t = full.reshape(Dl, 2, 2, Dr)
        return _apply_heff(Lenv, W1, W2, Renv, t).reshape(-1)[idx]

    theta = np.tensordot(A, B, axes=(2, 0)).reshape(-1)[idx]
    if np.linalg.norm(theta) == 0:
        theta = np.ones(idx.size, dtype=complex)
    energy, vec = _lowest(matvec, theta / np.linalg.norm(theta))
    full = np.zeros(Dl * 4 * Dr, dtype=complex)
    full[idx] = vec
    M = full.reshape(Dl * 2, 2 * Dr)
    absorb = "right" if direction == "right" else "left"
    lt, rt, q = _mps._split(state, M, absorb, _mps._rows(qa, 1), _mps._cols(qb, 1))
    T[i] = lt.reshape(Dl, 2, -1)
    T[i + 1] = rt.reshape(-1, 2, Dr)
    state.charges[i + 1] = q
    state.center = i + 2 if direction == "right" else i + 1
    return energy
