import numpy as np
import pytest

from hcboson import dmrg, fock, model, mps
from hcboson.errors import ConvergenceError, QuenchError
from hcboson.model import ModelParams

import oracles


def _exact_ground_energy(L, N, W):
    idx = oracles.sector(L, N)
    H = oracles.full_hamiltonian(L, 1.0, W).tocsr()[idx][:, idx].toarray()
    return np.linalg.eigvalsh(H)[0]


class TestSpread:
    @pytest.mark.parametrize("L,N", [(12, 8), (10, 0), (9, 9), (7, 3)])
    def test_count_and_binary(self, L, N):
        occ = dmrg.spread_occupations(L, N)
        assert occ.sum() == N and set(np.unique(occ)) <= {0, 1}


class TestGroundStateSearch:
    def test_interacting_against_full_space(self):
        # 2^12 operator sum restricted to the N = 8 sector
        L, N, W = 12, 8, 2.0
        ref = _exact_ground_energy(L, N, W)
        res = dmrg.ground_state_search(ModelParams(L=L, W=W), N, chi_max=64)
        assert abs(res.energy - ref) < 1e-8
        assert abs(mps.total_number(res.state) - N) < 1e-10

    @pytest.mark.parametrize("L,N", [(10, 4), (12, 6)])
    def test_free_energy_is_filled_band(self, L, N):
        res = dmrg.ground_state_search(ModelParams(L=L), N, chi_max=64)
        assert abs(res.energy - model.dispersion(L)[:N].sum()) < 1e-8

    def test_filled_three_sites(self):
        res = dmrg.ground_state_search(ModelParams(L=3, W=1.7), 3)
        assert abs(res.energy - 1.7) < 1e-12

    def test_state_matches_exact_density(self):
        L, N, W = 10, 6, 1.0
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, N)
        gs = fock.ground_state(model.hamiltonian(p, b), b)
        res = dmrg.ground_state_search(p, N, chi_max=64)
        np.testing.assert_allclose(mps.density_mps(res.state), fock.density(gs.state), atol=1e-7)

    def test_history_and_nonconvergence(self):
        with pytest.raises(ConvergenceError) as err:
            dmrg.ground_state_search(ModelParams(L=12, W=2.0), 8, chi_max=64, max_sweeps=1, tol=0.0)
        assert len(err.value.history) == 1

    def test_rejects_bad_filling(self):
        with pytest.raises(ValueError):
            dmrg.ground_state_search(ModelParams(L=5), 6)


class TestPairCreationOnMps:
    def test_weight_and_state_match_exact(self):
        L, N, W, site = 12, 6, 2.0, 6
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, N)
        gs = fock.ground_state(model.hamiltonian(p, b), b)
        ex, w_ex = fock.apply_pair_creation(gs.state, site)
        res = dmrg.ground_state_search(p, N, chi_max=128)
        st, w = mps.apply_pair_creation_mps(res.state, site)
        assert abs(w - w_ex) < 1e-8
        full = mps.to_dense(st)
        assert abs(abs(np.vdot(full[oracles.sector(L, N + 2)], ex.amplitudes)) - 1) < 1e-8

    def test_vacuum(self):
        st, w = mps.apply_pair_creation_mps(mps.from_occupations([0] * 6), 3)
        assert w == pytest.approx(1.0)
        np.testing.assert_allclose(mps.density_mps(st), oracles.box_occ(6, 3, 4), atol=1e-14)

    def test_filled_pair(self):
        with pytest.raises(QuenchError):
            mps.apply_pair_creation_mps(mps.from_occupations([1, 1]), 1)
