"""Independent brute-force oracles built from Kronecker products on the full
2^L Hilbert space. Nothing here uses the package's basis or Hamiltonian code.

Index convention matches the package: basis index = sum_i n_i 2^(i-1).
"""

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

I2 = np.eye(2)
NUM = np.diag([0.0, 1.0])
ANN = np.array([[0.0, 1.0], [0.0, 0.0]])  # b|1> = |0>
CRE = ANN.T


def site_op(L, site, op):
    """Sparse op acting on 1-based ``site``; site L is the most significant factor."""
    out = sp.identity(1, format="csr")
    for s in range(L, 0, -1):
        out = sp.kron(out, sp.csr_matrix(op) if s == site else sp.identity(2), format="csr")
    return out


def identity(L):
    return sp.identity(2**L, format="csr")


def full_hamiltonian(L, J=1.0, W=0.0):
    """Sparse 2^L x 2^L Hamiltonian; call ``.toarray()`` for small L."""
    H = sp.csr_matrix((2**L, 2**L))
    for i in range(1, L):
        hop = site_op(L, i, CRE) @ site_op(L, i + 1, ANN)
        H -= J * (hop + hop.T)
    for i in range(2, L):
        H += W * site_op(L, i - 1, NUM) @ site_op(L, i, NUM) @ site_op(L, i + 1, NUM)
    return H


def sector(L, N):
    """Full-space indices with N particles, in increasing order."""
    return np.array([m for m in range(2**L) if bin(m).count("1") == N])


def product_vector(occ):
    psi = np.zeros(2 ** len(occ), dtype=complex)
    psi[sum(int(n) << k for k, n in enumerate(occ))] = 1.0
    return psi


def box_occ(L, i1, i2):
    return [1 if i1 <= i <= i2 else 0 for i in range(1, L + 1)]


def propagate(H, psi, t):
    return spla.expm_multiply(-1j * t * sp.csr_matrix(H), psi)


def density(psi, L):
    return np.array([np.vdot(psi, site_op(L, i, NUM) @ psi).real for i in range(1, L + 1)])


def hopping(psi, L, bond):
    """<b+_bond b_{bond+1}>."""
    return np.vdot(psi, site_op(L, bond, CRE) @ site_op(L, bond + 1, ANN) @ psi)


def reduced_entropy(psi, L, cut):
    """Von Neumann entropy of sites 1..cut via the reduced density matrix."""
    # index = left + 2^cut * right with left holding sites 1..cut
    M = psi.reshape(2 ** (L - cut), 2**cut)
    rho = M.T @ M.conj()
    p = np.linalg.eigvalsh(rho)
    p = p[p > 1e-15]
    return float(-np.sum(p * np.log(p)))


def trotter2_step(L, J, W, dt):
    """Dense second-order step exp(-iH_o dt/2) exp(-iH_e dt/2) exp(-iH_w dt)
    exp(-iH_e dt/2) exp(-iH_o dt/2); odd bonds have odd left sites."""
    Ho = sp.csr_matrix((2**L, 2**L))
    He = sp.csr_matrix((2**L, 2**L))
    Hw = sp.csr_matrix((2**L, 2**L))
    for i in range(1, L):
        hop = site_op(L, i, CRE) @ site_op(L, i + 1, ANN)
        if i % 2:
            Ho -= J * (hop + hop.T)
        else:
            He -= J * (hop + hop.T)
    for i in range(2, L):
        Hw += W * site_op(L, i - 1, NUM) @ site_op(L, i, NUM) @ site_op(L, i + 1, NUM)
    Uo = la.expm(-0.5j * dt * Ho.toarray())
    Ue = la.expm(-0.5j * dt * He.toarray())
    Uw = la.expm(-1j * dt * Hw.toarray())
    return Uo @ Ue @ Uw @ Ue @ Uo
