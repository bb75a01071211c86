"""Matrix-product states for the hard-core chain and second-order TEBD.

Site tensors have shape (left bond, 2, right bond). Public functions take
1-based site labels; ``MpsState.center`` is also 1-based. Functions that
change the state work in place and return it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import QuenchError
from .model import (
    ModelParams,
    ThreeSitePhases,
    TwoSiteGate,
    half_current_bonds,
    hopping_gate,
    interaction_phases,
)

CHI_MAX = 400
SVD_EPS = 1e-8


@dataclass
class MpsState:
    tensors: list
    center: int | None = None
    discarded_weight: float = 0.0
    chi_max: int = CHI_MAX
    svd_eps: float = SVD_EPS
    # weight dropped during the most recent tebd_step
    step_discarded: float = 0.0
    # per-bond particle-number labels (see _bond_q), or None if untracked
    charges: list | None = None

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [self.tensors[0].shape[0]] + [A.shape[2] for A in self.tensors]

    def copy(self) -> "MpsState":
        return MpsState(
            tensors=[A.copy() for A in self.tensors],
            center=self.center,
            discarded_weight=self.discarded_weight,
            chi_max=self.chi_max,
            svd_eps=self.svd_eps,
            step_discarded=self.step_discarded,
            charges=None if self.charges is None else [q.copy() for q in self.charges],
        )


_SUZUKI_P = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))


@dataclass(frozen=True)
class TebdSchedule:
    """Symmetric Trotter splitting of one time step.

    ``order=2`` is the plain symmetric step (odd, even, interaction, even,
    odd). ``order=4`` composes five symmetric steps with Suzuki's weights
    (p, p, 1 - 4p, p, p), p = 1 / (4 - 4**(1/3)); it is used where the
    second-order error constant is too large for oracle comparisons.
    """

    dt: float = 0.1
    order: int = 2

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order}")

    @property
    def substeps(self) -> tuple:
        if self.order == 2:
            return (self.dt,)
        p = _SUZUKI_P * self.dt
        return (p, p, self.dt - 4 * p, p, p)

    @property
    def layers(self) -> tuple:
        out = []
        for tau in self.substeps:
            h = tau / 2
            out += [
                ("hop_odd", h),
                ("hop_even", h),
                ("interaction", tau),
                ("hop_even", h),
                ("hop_odd", h),
            ]
        return tuple(out)


# --- construction -----------------------------------------------------------


def from_occupations(occ, chi_max: int = CHI_MAX, svd_eps: float = SVD_EPS) -> MpsState:
    occ = np.asarray(occ)
    if not np.all((occ == 0) | (occ == 1)):
        raise ValueError("occupations must be 0 or 1")
    tensors = []
    for n in occ:
        A = np.zeros((1, 2, 1), dtype=complex)
        A[0, int(n), 0] = 1.0
        tensors.append(A)
    charges = [np.array([c]) for c in np.concatenate([[0], np.cumsum(occ)]).astype(np.int64)]
    return MpsState(tensors, center=1, chi_max=chi_max, svd_eps=svd_eps, charges=charges)


def from_dense(psi: np.ndarray, L: int, chi_max: int = CHI_MAX, svd_eps: float = SVD_EPS) -> MpsState:
    """Exact MPS of a 2**L vector indexed by bitmask (bit i-1 = site i)."""
    psi = np.asarray(psi, dtype=complex).reshape([2] * L)
    # bitmask indexing puts site 1 on the last axis
    rest = psi.transpose(range(L - 1, -1, -1)).reshape(1, -1)
    tensors = []
    for _ in range(L - 1):
        D = rest.shape[0]
        U, s, Vh = np.linalg.svd(rest.reshape(D * 2, -1), full_matrices=False)
        keep = max(1, int(np.sum(s > 1e-14 * s[0])))
        tensors.append(U[:, :keep].reshape(D, 2, keep))
        rest = s[:keep, None] * Vh[:keep]
    tensors.append(rest.reshape(rest.shape[0], 2, 1))
    return MpsState(tensors, center=L, chi_max=chi_max, svd_eps=svd_eps)


def random_mps(L: int, chi: int, seed: int = 0) -> MpsState:
    """Normalized random MPS (not number conserving); used by tests."""
    rng = np.random.default_rng(seed)
    dims = [min(chi, 2**i, 2 ** (L - i)) for i in range(L + 1)]
    tensors = [
        rng.standard_normal((dims[i], 2, dims[i + 1]))
        + 1j * rng.standard_normal((dims[i], 2, dims[i + 1]))
        for i in range(L)
    ]
    state = MpsState(tensors, center=None)
    canonicalize(state, 1)
    c = state.tensors[0]
    state.tensors[0] = c / np.linalg.norm(c)
    return state


def to_dense(state: MpsState) -> np.ndarray:
    psi = state.tensors[0]
    for A in state.tensors[1:]:
        psi = np.tensordot(psi, A, axes=(psi.ndim - 1, 0))
    psi = psi.reshape([2] * state.L)
    return psi.transpose(range(state.L - 1, -1, -1)).reshape(-1)


def overlap(a: MpsState, b: MpsState) -> complex:
    """<a|b>."""
    E = np.ones((1, 1), dtype=complex)
    for A, B in zip(a.tensors, b.tensors):
        E = np.einsum("ab,asc,bsd->cd", E, A.conj(), B, optimize=True)
    return complex(E[0, 0])


def norm(state: MpsState) -> float:
    return float(np.sqrt(abs(overlap(state, state))))


# --- gauge ------------------------------------------------------------------
#
# When ``state.charges`` is set, bond k carries for every index the number of
# particles on sites 1..k. Every tensor is then block-sparse (stored dense)
# and all factorizations run sector by sector, which both preserves exact
# particle-number conservation and makes each SVD much smaller.


def _bond_q(state: MpsState, k: int) -> np.ndarray:
    """Charge labels of bond k (0..L); zeros when charges are not tracked."""
    if state.charges is not None:
        return state.charges[k]
    if k == 0:
        return np.zeros(state.tensors[0].shape[0], dtype=np.int64)
    return np.zeros(state.tensors[k - 1].shape[2], dtype=np.int64)


def _set_bond_q(state: MpsState, k: int, q: np.ndarray):
    if state.charges is not None:
        state.charges[k] = q


def _sectors(row_q: np.ndarray, col_q: np.ndarray):
    for q in np.intersect1d(row_q, col_q):
        yield q, np.nonzero(row_q == q)[0], np.nonzero(col_q == q)[0]


def _svd(M: np.ndarray):
    try:
        return np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError:
        return la.svd(M, full_matrices=False, lapack_driver="gesvd")


def _block_matmul(X: np.ndarray, Y: np.ndarray, row_q, mid_q, col_q, tracked: bool) -> np.ndarray:
    """X @ Y for block-sparse X and Y whose shared index carries ``mid_q``."""
    if not tracked:
        return X @ Y
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.result_type(X, Y))
    for q in np.unique(mid_q):
        r = np.nonzero(row_q == q)[0]
        c = np.nonzero(col_q == q)[0]
        if r.size and c.size:
            m = np.nonzero(mid_q == q)[0]
            out[np.ix_(r, c)] = X[np.ix_(r, m)] @ Y[np.ix_(m, c)]
    return out


def _block_qr(M: np.ndarray, row_q, col_q):
    """M = Q @ R sector by sector; returns (Q, R, new bond charges)."""
    Qs, Rs, qs = [], [], []
    for q, r, c in _sectors(row_q, col_q):
        Qb, Rb = la.qr(M[np.ix_(r, c)], mode="economic")
        Qs.append((r, Qb))
        Rs.append((c, Rb))
        qs.append(np.full(Qb.shape[1], q))
    k = sum(Qb.shape[1] for _, Qb in Qs)
    Q = np.zeros((M.shape[0], k), dtype=M.dtype)
    R = np.zeros((k, M.shape[1]), dtype=M.dtype)
    off = 0
    for (r, Qb), (c, Rb) in zip(Qs, Rs):
        w = Qb.shape[1]
        Q[r, off : off + w] = Qb
        R[off : off + w, c] = Rb
        off += w
    return Q, R, np.concatenate(qs) if qs else np.zeros(0, dtype=np.int64)


def _shift_right(state: MpsState, c: int):
    """Move a 0-based center from c to c + 1 by QR."""
    A = state.tensors[c]
    Dl, d, Dr = A.shape
    tr = state.charges is not None
    row_q = _rows(_bond_q(state, c), 1, tr)
    Q, R, q = _block_qr(A.reshape(Dl * d, Dr), row_q, _bond_q(state, c + 1))
    B = state.tensors[c + 1]
    col_q = _cols(_bond_q(state, c + 2), 1, tr)
    prod = _block_matmul(R, B.reshape(B.shape[0], -1), q, _bond_q(state, c + 1), col_q, tr)
    state.tensors[c] = Q.reshape(Dl, d, -1)
    state.tensors[c + 1] = prod.reshape(-1, d, B.shape[2])
    _set_bond_q(state, c + 1, q)


def _shift_left(state: MpsState, c: int):
    A = state.tensors[c]
    Dl, d, Dr = A.shape
    tr = state.charges is not None
    col_q = _cols(_bond_q(state, c + 1), 1, tr)
    # RQ of M is the conjugate transpose of QR of M^H
    Q, R, q = _block_qr(A.reshape(Dl, d * Dr).conj().T, col_q, _bond_q(state, c))
    P = state.tensors[c - 1]
    row_q = _rows(_bond_q(state, c - 1), 1, tr)
    prod = _block_matmul(P.reshape(-1, P.shape[2]), R.conj().T, row_q, _bond_q(state, c), q, tr)
    state.tensors[c] = Q.conj().T.reshape(-1, d, Dr)
    state.tensors[c - 1] = prod.reshape(P.shape[0], d, -1)
    _set_bond_q(state, c, q)


def canonicalize(state: MpsState, new_center: int) -> MpsState:
    """Mixed-canonical form with the orthogonality center at ``new_center``."""
    L = state.L
    if not 1 <= new_center <= L:
        raise ValueError(f"center must be in 1..{L}, got {new_center}")
    target = new_center - 1
    if state.center is None:
        for c in range(0, target):
            _shift_right(state, c)
        for c in range(L - 1, target, -1):
            _shift_left(state, c)
    else:
        c = state.center - 1
        while c < target:
            _shift_right(state, c)
            c += 1
        while c > target:
            _shift_left(state, c)
            c -= 1
    state.center = new_center
    return state


def isometry_residual(state: MpsState) -> float:
    """Largest deviation from left/right isometry around the center."""
    worst = 0.0
    c = state.center - 1
    for k, A in enumerate(state.tensors):
        if k < c:
            M = np.einsum("asb,asc->bc", A.conj(), A)
        elif k > c:
            M = np.einsum("asb,csb->ac", A.conj(), A)
        else:
            continue
        worst = max(worst, float(np.max(np.abs(M - np.eye(M.shape[0])))))
    return worst


# --- truncated splitting ----------------------------------------------------


def block_svd(M: np.ndarray, row_q, col_q):
    """Sector-wise SVD. Returns (U, s, Vh, q) with the new index sorted by
    charge and, within a charge, by descending singular value."""
    Us, Vs, ss, qs = [], [], [], []
    for q, r, c in _sectors(row_q, col_q):
        Ub, sb, Vb = _svd(M[np.ix_(r, c)])
        Us.append((r, Ub))
        Vs.append((c, Vb))
        ss.append(sb)
        qs.append(np.full(sb.shape[0], q))
    k = sum(sb.shape[0] for sb in ss)
    U = np.zeros((M.shape[0], k), dtype=M.dtype)
    Vh = np.zeros((k, M.shape[1]), dtype=M.dtype)
    off = 0
    for (r, Ub), (c, Vb) in zip(Us, Vs):
        w = Ub.shape[1]
        U[r, off : off + w] = Ub
        Vh[off : off + w, c] = Vb
        off += w
    if not ss:
        return U, np.zeros(0), Vh, np.zeros(0, dtype=np.int64)
    return U, np.concatenate(ss), Vh, np.concatenate(qs)


def _truncation_mask(s: np.ndarray, chi_max: int, svd_eps: float) -> np.ndarray:
    keep = s >= svd_eps * s.max()
    if keep.sum() > chi_max:
        order = np.argsort(-s, kind="stable")
        keep = np.zeros_like(keep)
        keep[order[:chi_max]] = True
    return keep


def _split(state: MpsState, M: np.ndarray, absorb: str, row_q, col_q):
    """Truncated SVD of M; returns (left, right, charges of the new bond)
    with singular values absorbed on the side named by ``absorb``.
    Accumulates the discarded weight and renormalizes the kept part."""
    U, s, Vh, q = block_svd(M, row_q, col_q)
    total = float(np.dot(s, s))
    if total == 0.0:
        keep = np.zeros(len(s), dtype=bool)
        keep[:1] = True
    else:
        keep = _truncation_mask(s, state.chi_max, state.svd_eps)
    kept = float(np.dot(s[keep], s[keep]))
    dropped = max(0.0, (total - kept) / total) if total > 0 else 0.0
    state.discarded_weight += dropped
    state.step_discarded += dropped
    s = s[keep] / np.sqrt(kept) if kept > 0 else s[keep]
    U, Vh, q = U[:, keep], Vh[keep], q[keep]
    if absorb == "right":
        return U, s[:, None] * Vh, q
    return U * s, Vh, q


def _move_to(state: MpsState, center0: int):
    canonicalize(state, center0 + 1)


def _rows(q_left: np.ndarray, nsites: int, tracked: bool = True) -> np.ndarray:
    """Charges of the fused (left bond, s_1, .., s_n) row index."""
    if not tracked:
        return np.zeros(len(q_left) * 2**nsites, dtype=np.int64)
    q = q_left
    for _ in range(nsites):
        q = (q[:, None] + np.arange(2)).reshape(-1)
    return q


def _cols(q_right: np.ndarray, nsites: int, tracked: bool = True) -> np.ndarray:
    """Charges (particles to the left) of the fused (s_1, .., s_n, right bond) column index."""
    if not tracked:
        return np.zeros(len(q_right) * 2**nsites, dtype=np.int64)
    q = q_right
    for _ in range(nsites):
        q = (q[None, :] - np.arange(2)[:, None]).reshape(-1)
    return q


def apply_two_site_gate(
    state: MpsState, bond: int, gate: TwoSiteGate, direction: str = "right"
) -> MpsState:
    """Apply ``gate`` to sites (bond, bond + 1).

    The center ends on bond + 1 for ``direction='right'`` and on ``bond``
    otherwise. Singular values below svd_eps * s_max are dropped and the
    bond is capped at chi_max.
    """
    i = bond - 1
    if state.center is None or state.center - 1 not in (i, i + 1):
        _move_to(state, i)
    tr = state.charges is not None
    A, B = state.tensors[i], state.tensors[i + 1]
    Dl, Dr = A.shape[0], B.shape[2]
    row_q = _rows(_bond_q(state, i), 1, tr)
    col_q = _cols(_bond_q(state, i + 2), 1, tr)
    theta = _block_matmul(
        A.reshape(Dl * 2, -1), B.reshape(-1, 2 * Dr), row_q, _bond_q(state, i + 1), col_q, tr
    )
    theta = np.einsum("st,atb->asb", gate.matrix, theta.reshape(Dl, 4, Dr))
    absorb = "right" if direction == "right" else "left"
    left, right, q = _split(state, theta.reshape(Dl * 2, 2 * Dr), absorb, row_q, col_q)
    state.tensors[i] = left.reshape(Dl, 2, -1)
    state.tensors[i + 1] = right.reshape(-1, 2, Dr)
    _set_bond_q(state, i + 1, q)
    state.center = bond + 1 if direction == "right" else bond
    return state


def apply_three_site_diagonal(
    state: MpsState, left_site: int, phases: ThreeSitePhases, direction: str = "right"
) -> MpsState:
    """Multiply the diagonal three-site phases on sites left_site .. left_site + 2.

    The three tensors are merged, phased, and re-split with two truncated
    SVDs. The center ends on the far site in the sweep direction.
    """
    i = left_site - 1
    if state.center is None or not i <= state.center - 1 <= i + 2:
        _move_to(state, i)
    A, B, C = state.tensors[i : i + 3]
    Dl, Dr = A.shape[0], C.shape[2]
    qa, qb = _bond_q(state, i), _bond_q(state, i + 3)
    tr = state.charges is not None
    AB = _block_matmul(
        A.reshape(Dl * 2, -1),
        B.reshape(B.shape[0], -1),
        _rows(qa, 1, tr),
        _bond_q(state, i + 1),
        _cols(_bond_q(state, i + 2), 1, tr),
        tr,
    )
    theta = _block_matmul(
        AB.reshape(Dl * 4, -1),
        C.reshape(C.shape[0], -1),
        _rows(qa, 2, tr),
        _bond_q(state, i + 2),
        _cols(qb, 1, tr),
        tr,
    )
    theta = theta.reshape(Dl, 2, 2, 2, Dr) * phases.phases.reshape(1, 2, 2, 2, 1)
    if direction == "right":
        M = theta.reshape(Dl * 2, 4 * Dr)
        left, rest, q1 = _split(state, M, "right", _rows(qa, 1, tr), _cols(qb, 2, tr))
        k = left.shape[1]
        M = rest.reshape(k * 2, 2 * Dr)
        mid, right, q2 = _split(state, M, "right", _rows(q1, 1, tr), _cols(qb, 1, tr))
        state.tensors[i] = left.reshape(Dl, 2, k)
        state.tensors[i + 1] = mid.reshape(k, 2, -1)
        state.tensors[i + 2] = right.reshape(-1, 2, Dr)
        state.center = left_site + 2
    else:
        M = theta.reshape(Dl * 4, 2 * Dr)
        rest, right, q2 = _split(state, M, "left", _rows(qa, 2, tr), _cols(qb, 1, tr))
        k = right.shape[0]
        M = rest.reshape(Dl * 2, 2 * k)
        left, mid, q1 = _split(state, M, "left", _rows(qa, 1, tr), _cols(q2, 1, tr))
        state.tensors[i] = left.reshape(Dl, 2, -1)
        state.tensors[i + 1] = mid.reshape(-1, 2, k)
        state.tensors[i + 2] = right.reshape(k, 2, Dr)
        state.center = left_site
    _set_bond_q(state, i + 1, q1)
    _set_bond_q(state, i + 2, q2)
    return state


# --- TEBD -------------------------------------------------------------------


def _sweeps_right(state: MpsState) -> bool:
    return state.center is None or state.center - 1 <= (state.L - 1) / 2


def _hop_layer(state: MpsState, parity: int, gate: TwoSiteGate):
    """Gates on all bonds whose 1-based left site has the given parity."""
    bonds = [b for b in range(1, state.L) if b % 2 == parity]
    if _sweeps_right(state):
        for b in bonds:
            apply_two_site_gate(state, b, gate, "right")
    else:
        for b in reversed(bonds):
            apply_two_site_gate(state, b, gate, "left")


def _interaction_layer(state: MpsState, phases: ThreeSitePhases):
    # the diagonal phase gates commute, so the order is only a gauge choice
    lefts = range(1, state.L - 1)
    if _sweeps_right(state):
        for l in lefts:
            apply_three_site_diagonal(state, l, phases, "right")
    else:
        for l in reversed(lefts):
            apply_three_site_diagonal(state, l, phases, "left")


def tebd_step(state: MpsState, params: ModelParams, schedule: TebdSchedule) -> MpsState:
    state.step_discarded = 0.0
    if schedule.dt == 0:
        return state
    for kind, dt in schedule.layers:
        if kind == "interaction":
            if params.W != 0:
                _interaction_layer(state, interaction_phases(params, dt))
        else:
            _hop_layer(state, 1 if kind == "hop_odd" else 0, hopping_gate(params, dt))
    return state


# --- measurement ------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    density: np.ndarray
    hopping: np.ndarray  # <b+_i b_{i+1}>, entry i - 1 for bond (i, i+1)
    entropies: np.ndarray  # entry i - 1 for the cut between i and i+1
    norm: float

    def half_current(self, J: float) -> float:
        L = len(self.density)
        bonds = np.array(half_current_bonds(L)) - 1
        if bonds.size == 0:
            return 0.0
        return float(np.sum(2.0 * J * self.hopping[bonds].imag))


def _entropy(s: np.ndarray) -> float:
    p = s**2 / np.dot(s, s)
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def measure(state: MpsState) -> Measurement:
    """Density, bond hoppings and entanglement entropies in one sweep.

    Works on a copy; the input's gauge is untouched.
    """
    work = canonicalize(state.copy(), 1)
    L = work.L
    T = work.tensors
    nrm2 = float(np.vdot(T[0], T[0]).real)
    dens = np.empty(L)
    hop = np.empty(L - 1, dtype=complex)
    ent = np.empty(L - 1)
    for c in range(L):
        A = T[c]
        dens[c] = float(np.vdot(A[:, 1, :], A[:, 1, :]).real) / nrm2
        if c == L - 1:
            break
        theta = np.tensordot(A, T[c + 1], axes=(2, 0))
        hop[c] = np.vdot(theta[:, 1, 0, :], theta[:, 0, 1, :]) / nrm2
        Dl, d, Dr = A.shape
        row_q = _rows(_bond_q(work, c), 1, work.charges is not None)
        U, s, Vh, q = block_svd(A.reshape(Dl * d, Dr), row_q, _bond_q(work, c + 1))
        ent[c] = _entropy(s) if s.size and s.max() > 0 else 0.0
        T[c] = U.reshape(Dl, d, -1)
        T[c + 1] = np.tensordot(s[:, None] * Vh, T[c + 1], axes=(1, 0))
        _set_bond_q(work, c + 1, q)
    return Measurement(dens, hop, ent, float(np.sqrt(nrm2)))


def density_mps(state: MpsState) -> np.ndarray:
    return measure(state).density


def half_current_mps(state: MpsState, J: float) -> float:
    return measure(state).half_current(J)


def bond_entropy(state: MpsState, bond: int) -> float:
    """Von Neumann entropy of the cut between sites ``bond`` and ``bond + 1``."""
    canonicalize(state, bond)
    A = state.tensors[bond - 1]
    Dl, d, Dr = A.shape
    s = np.linalg.svd(A.reshape(Dl * d, Dr), compute_uv=False)
    return _entropy(s) if s.max() > 0 else 0.0


def total_number(state: MpsState) -> float:
    return float(np.sum(measure(state).density))


# --- quench -----------------------------------------------------------------


def apply_pair_creation_mps(state: MpsState, site: int):
    """Apply b+_site b+_{site+1}, renormalize; returns (state, weight).

    ``weight`` is the squared norm before renormalization.
    """
    if not 1 <= site <= state.L - 1:
        raise ValueError(f"pair site must be in 1..{state.L - 1}, got {site}")
    canonicalize(state, site)
    i = site - 1
    A, B = state.tensors[i], state.tensors[i + 1]
    Dl, Dr = A.shape[0], B.shape[2]
    theta = np.tensordot(A, B, axes=(2, 0))
    raised = np.zeros_like(theta)
    raised[:, 1, 1, :] = theta[:, 0, 0, :]
    weight = float(np.vdot(raised, raised).real)
    if weight < 1e-300:
        raise QuenchError(f"pair creation at sites {site}, {site + 1} gives zero norm")
    if state.charges is not None:
        for k in range(i + 2, state.L + 1):
            state.charges[k] = state.charges[k] + 2
    before = state.discarded_weight
    tr = state.charges is not None
    left, right, q = _split(
        state,
        raised.reshape(Dl * 2, 2 * Dr),
        "left",
        _rows(_bond_q(state, i), 1, tr),
        _cols(_bond_q(state, i + 2), 1, tr),
    )
    state.step_discarded = state.discarded_weight - before
    state.tensors[i] = left.reshape(Dl, 2, -1)
    state.tensors[i + 1] = right.reshape(-1, 2, Dr)
    _set_bond_q(state, i + 1, q)
    state.center = site
    return state, weight


# --- checkpoint arrays ------------------------------------------------------


def to_arrays(state: MpsState) -> dict:
    out = {
        "mps_L": np.array(state.L),
        "mps_center": np.array(-1 if state.center is None else state.center),
        "mps_discarded_weight": np.array(state.discarded_weight),
        "mps_chi_max": np.array(state.chi_max),
        "mps_svd_eps": np.array(state.svd_eps),
    }
    for k, A in enumerate(state.tensors):
        out[f"mps_tensor_{k}"] = A
    if state.charges is not None:
        for k, q in enumerate(state.charges):
            out[f"mps_charges_{k}"] = q
    return out


def from_arrays(arrays) -> MpsState:
    L = int(arrays["mps_L"])
    center = int(arrays["mps_center"])
    return MpsState(
        tensors=[np.array(arrays[f"mps_tensor_{k}"]) for k in range(L)],
        center=None if center < 0 else center,
        discarded_weight=float(arrays["mps_discarded_weight"]),
        chi_max=int(arrays["mps_chi_max"]),
        svd_eps=float(arrays["mps_svd_eps"]),
        charges=[np.array(arrays[f"mps_charges_{k}"]) for k in range(L + 1)]
        if "mps_charges_0" in arrays
        else None,
    )
