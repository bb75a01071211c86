"""Exact fixed-particle-number engine for small chains.

Serves as the oracle for the other engines: basis enumeration, Krylov or
spectral time stepping, exact ground states and the measured observables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapacityError, ConvergenceError, QuenchError
from .model import half_current_bonds

#: Largest sector the exact engine agrees to enumerate.
BASIS_CAP = 5_000_000
#: Up to this dimension time evolution uses a full eigendecomposition.
SPECTRAL_DIM = 2000
KRYLOV_MAX = 30
MAX_HALVINGS = 12


@dataclass(frozen=True)
class FockBasis:
    L: int
    N: int
    states: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.states)

    @property
    def index(self) -> dict[int, int]:
        return {int(s): k for k, s in enumerate(self.states)}

    def lookup(self, masks) -> np.ndarray:
        """Ordinals of the given bitmasks; raises KeyError for foreign masks."""
        masks = np.asarray(masks, dtype=np.int64)
        pos = np.searchsorted(self.states, masks)
        pos = np.minimum(pos, len(self.states) - 1)
        if np.any(self.states[pos] != masks):
            raise KeyError("mask not in basis")
        return pos

    def occupations(self) -> np.ndarray:
        """0/1 matrix of shape (dim, L); column i - 1 is site i."""
        return ((self.states[:, None] >> np.arange(self.L)) & 1).astype(float)


@dataclass(frozen=True)
class FockVector:
    basis: FockBasis
    amplitudes: np.ndarray = field(repr=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockVector":
        return FockVector(self.basis, self.amplitudes / self.norm())


class GroundState(NamedTuple):
    energy: float
    state: FockVector
    degenerate: bool


def enumerate_basis(L: int, N: int, cap: int = BASIS_CAP) -> FockBasis:
    if not 0 <= N <= L:
        raise ValueError(f"need 0 <= N <= L, got N={N}, L={L}")
    dim = math.comb(L, N)
    if dim > cap:
        raise CapacityError(L, N, dim, cap)
    states = np.fromiter(
        (sum(1 << i for i in occ) for occ in itertools.combinations(range(L), N)),
        dtype=np.int64,
        count=dim,
    )
    states.sort()
    return FockBasis(L=L, N=N, states=states)


def box_state(basis: FockBasis, i1: int, i2: int) -> FockVector:
    """Product state with sites i1..i2 (1-based, inclusive) occupied."""
    if not 1 <= i1 <= i2 <= basis.L:
        raise ValueError(f"box [{i1}, {i2}] outside 1..{basis.L}")
    if i2 - i1 + 1 != basis.N:
        raise ValueError(f"box width {i2 - i1 + 1} does not match N={basis.N}")
    mask = ((1 << (i2 - i1 + 1)) - 1) << (i1 - 1)
    amps = np.zeros(len(basis), dtype=complex)
    amps[basis.lookup([mask])[0]] = 1.0
    return FockVector(basis, amps)


def _expm_krylov(H, v: np.ndarray, dt: float, tol: float):
    """One Lanczos approximation of exp(-i H dt) v; returns (w, error estimate)."""
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy(), 0.0
    V = [v / beta0]
    alpha, beta = [], []
    err = np.inf
    for m in range(1, KRYLOV_MAX + 1):
        w = H @ V[-1]
        a = np.vdot(V[-1], w).real
        w = w - a * V[-1]
        if m > 1:
            w = w - beta[-1] * V[-2]
        # full reorthogonalization keeps the small basis clean
        for u in V:
            w = w - np.vdot(u, w) * u
        alpha.append(a)
        b = np.linalg.norm(w)
        T = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
        coeff = la.expm(-1j * dt * T)[:, 0]
        err = b * abs(coeff[-1]) * beta0
        if b < 1e-14 or err < tol:
            return beta0 * (np.array(V).T @ coeff), err
        beta.append(b)
        V.append(w / b)
    return None, err


def evolve(state: FockVector, H, dt: float, tol: float = 1e-12) -> FockVector:
    """exp(-i H dt) |state> with 2-norm error at most ``tol``.

    Small sectors use a dense eigendecomposition; larger ones use Lanczos
    with up to 30 vectors, halving the step whenever the error bound fails.
    """
    if dt == 0:
        return FockVector(state.basis, state.amplitudes.copy())
    if H.shape[0] != len(state.amplitudes):
        raise ValueError("Hamiltonian and state dimensions differ")
    if H.shape[0] <= SPECTRAL_DIM:
        return ExactPropagator(H).evolve(state, dt)
    out = state.amplitudes
    pieces = [(dt, 0)]
    while pieces:
        step, depth = pieces.pop()
        w, err = _expm_krylov(H, out, step, tol * abs(step) / abs(dt))
        if w is None:
            if depth >= MAX_HALVINGS:
                raise ConvergenceError(
                    f"Krylov step did not converge, residual {err:.3e}", [err]
                )
            pieces.extend([(step / 2, depth + 1)] * 2)
            continue
        out = w
    return FockVector(state.basis, out)


class ExactPropagator:
    """Spectral propagator for one Hamiltonian; caches the eigendecomposition."""

    def __init__(self, H):
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        self.energies, self.vectors = la.eigh(Hd)

    def evolve(self, state: FockVector, dt: float) -> FockVector:
        c = self.vectors.conj().T @ state.amplitudes
        c = np.exp(-1j * self.energies * dt) * c
        return FockVector(state.basis, self.vectors @ c)


def ground_state(H, basis: FockBasis, gap_tol: float = 1e-8) -> GroundState:
    dim = H.shape[0]
    if dim == 1:
        e = float(np.real(H[0, 0]))
        return GroundState(e, FockVector(basis, np.ones(1, dtype=complex)), False)
    if dim <= SPECTRAL_DIM:
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        evals, evecs = la.eigh(Hd, subset_by_index=[0, 1])
    else:
        v0 = np.random.default_rng(0).standard_normal(dim)
        evals, evecs = spla.eigsh(sp.csr_matrix(H), k=2, which="SA", v0=v0, tol=1e-13)
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    vec = evecs[:, 0].astype(complex)
    # fix the arbitrary eigenvector sign so reruns are reproducible
    k = np.argmax(np.abs(vec))
    vec *= np.abs(vec[k]) / vec[k]
    vec /= np.linalg.norm(vec)
    degenerate = bool(evals[1] - evals[0] < gap_tol)
    return GroundState(float(evals[0]), FockVector(basis, vec), degenerate)


def apply_pair_creation(state: FockVector, site: int, target: FockBasis | None = None):
    """Apply b+_site b+_{site+1} and renormalize.

    Returns ``(new_state, weight)`` where ``weight`` is the squared norm
    before renormalization, i.e. the probability that both sites were empty.
    """
    L = state.basis.L
    if not 1 <= site <= L - 1:
        raise ValueError(f"pair site must be in 1..{L - 1}, got {site}")
    if state.basis.N + 2 > L:
        raise QuenchError(f"no room for two more particles in a filled sector (N={state.basis.N}, L={L})")
    if target is None:
        target = enumerate_basis(L, state.basis.N + 2)
    pair = np.int64(3) << (site - 1)
    src = state.basis.states
    empty = (src & pair) == 0
    amps = np.zeros(len(target), dtype=complex)
    amps[target.lookup(src[empty] | pair)] = state.amplitudes[empty]
    weight = float(np.vdot(amps, amps).real)
    if weight < 1e-300:
        raise QuenchError(f"pair creation at sites {site}, {site + 1} gives zero norm")
    return FockVector(target, amps / np.sqrt(weight)), weight


def density(state: FockVector) -> np.ndarray:
    probs = np.abs(state.amplitudes) ** 2
    return probs @ state.basis.occupations()


def bond_hopping(state: FockVector, bond: int) -> complex:
    """<b+_bond b_{bond+1}> for the 1-based bond (bond, bond + 1)."""
    states = state.basis.states
    src = np.nonzero(((states >> (bond - 1)) & 3) == 2)[0]
    dst = state.basis.lookup(states[src] ^ (np.int64(3) << (bond - 1)))
    return complex(np.vdot(state.amplitudes[dst], state.amplitudes[src]))


def half_current(state: FockVector, J: float) -> float:
    L = state.basis.L
    return float(sum(2.0 * J * bond_hopping(state, b).imag for b in half_current_bonds(L)))


def energy(state: FockVector, H) -> float:
    return float(np.vdot(state.amplitudes, H @ state.amplitudes).real)
