import math

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings, strategies as st

from hcboson import fock, freefermion as ff, model, mps
from hcboson.errors import QuenchError
from hcboson.model import ModelParams, ThreeSitePhases, TwoSiteGate

import oracles


def _unit(a, c):
    E = np.zeros((2, 2))
    E[a, c] = 1.0
    return E


def dense_two_site(L, bond, g):
    """Full-space operator of a 4x4 gate in the (n_left, n_right) basis."""
    G = 0 * oracles.identity(L)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    amp = g[2 * a + b, 2 * c + d]
                    if amp:
                        G += amp * oracles.site_op(L, bond, _unit(a, c)) @ oracles.site_op(L, bond + 1, _unit(b, d))
    return G


def dense_three_site(L, left, phases):
    diag = np.ones(2**L, dtype=complex)
    for m in range(2**L):
        bits = [(m >> (left - 1 + k)) & 1 for k in range(3)]
        diag[m] = phases[4 * bits[0] + 2 * bits[1] + bits[2]]
    return diag


def random_number_state(L, N, seed):
    rng = np.random.default_rng(seed)
    psi = np.zeros(2**L, dtype=complex)
    idx = oracles.sector(L, N)
    psi[idx] = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    return psi / np.linalg.norm(psi)


def box_mps(L, i1, i2, **kw):
    return mps.from_occupations(oracles.box_occ(L, i1, i2), **kw)


class TestConstruction:
    def test_vacuum(self):
        s = mps.from_occupations([0] * 7)
        assert s.bond_dims == [1] * 8 or all(d == 1 for d in s.bond_dims)
        np.testing.assert_array_equal(mps.density_mps(s), np.zeros(7))

    @given(st.lists(st.integers(0, 1), min_size=3, max_size=12))
    def test_product_state(self, occ):
        s = mps.from_occupations(occ)
        np.testing.assert_allclose(mps.to_dense(s), oracles.product_vector(occ), atol=0)
        np.testing.assert_array_equal(mps.density_mps(s), occ)

    def test_large_box(self):
        s = box_mps(180, 81, 100)
        np.testing.assert_array_equal(mps.density_mps(s), oracles.box_occ(180, 81, 100))

    def test_dense_round_trip(self):
        psi = random_number_state(8, 3, 1)
        np.testing.assert_allclose(mps.to_dense(mps.from_dense(psi, 8)), psi, atol=1e-12)

    def test_random_state_overlap(self):
        r = mps.random_mps(10, 8, seed=3)
        psi = mps.to_dense(r)
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        back = mps.from_dense(psi, 10)
        assert abs(abs(mps.overlap(back, r)) - 1) < 1e-12


class TestCanonical:
    @pytest.mark.parametrize("center", [1, 4, 9, 10])
    def test_preserves_state(self, center):
        r = mps.random_mps(10, 8, seed=5)
        psi = mps.to_dense(r)
        mps.canonicalize(r, center)
        assert r.center == center
        np.testing.assert_allclose(mps.to_dense(r), psi, atol=1e-12)
        assert mps.isometry_residual(r) < 1e-12

    def test_product_state_unchanged(self):
        s = box_mps(8, 3, 5)
        psi = mps.to_dense(s)
        mps.canonicalize(s, 6)
        np.testing.assert_allclose(mps.to_dense(s), psi, atol=1e-14)

    def test_noop_when_centered(self):
        r = mps.random_mps(8, 4, seed=2)
        mps.canonicalize(r, 3)
        before = [A.copy() for A in r.tensors]
        mps.canonicalize(r, 3)
        for a, b in zip(before, r.tensors):
            np.testing.assert_allclose(a, b, atol=1e-14)

    def test_charged_state_stays_number_conserving(self):
        s = mps.from_occupations(oracles.box_occ(10, 3, 6))
        p = ModelParams(L=10, W=1.0)
        for _ in range(5):
            mps.tebd_step(s, p, mps.TebdSchedule(0.1))
        psi = mps.to_dense(s)
        mps.canonicalize(s, 2)
        np.testing.assert_allclose(mps.to_dense(s), psi, atol=1e-12)
        assert mps.isometry_residual(s) < 1e-12


class TestTwoSiteGate:
    def test_identity(self):
        r = mps.random_mps(8, 6, seed=4)
        psi = mps.to_dense(r)
        mps.apply_two_site_gate(r, 3, TwoSiteGate(np.eye(4, dtype=complex), 0.0))
        np.testing.assert_allclose(mps.to_dense(r), psi, atol=1e-12)
        assert r.discarded_weight < 1e-14

    @pytest.mark.parametrize("dt", [0.1, 0.7, 1.3])
    def test_rotation_of_single_particle(self, dt):
        s = mps.from_occupations([0, 1, 0, 0])
        mps.apply_two_site_gate(s, 2, model.hopping_gate(ModelParams(L=4), dt))
        np.testing.assert_allclose(mps.density_mps(s)[1:3], [math.cos(dt) ** 2, math.sin(dt) ** 2], atol=1e-14)

    @pytest.mark.parametrize("bond,direction", [(1, "right"), (4, "left"), (7, "right"), (5, "left")])
    def test_matches_dense_operator(self, bond, direction):
        L = 8
        rng = np.random.default_rng(bond)
        g = la.expm(-1j * (lambda h: h + h.conj().T)(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))))
        r = mps.random_mps(L, 16, seed=bond)
        psi = mps.to_dense(r)
        mps.apply_two_site_gate(r, bond, TwoSiteGate(g, 0.0), direction)
        np.testing.assert_allclose(mps.to_dense(r), dense_two_site(L, bond, g) @ psi, atol=1e-10)


class TestThreeSiteGate:
    def test_free_phases_are_identity(self):
        r = mps.from_dense(random_number_state(8, 4, 2), 8)
        psi = mps.to_dense(r)
        mps.apply_three_site_diagonal(r, 3, model.interaction_phases(ModelParams(L=8), 0.1))
        np.testing.assert_allclose(mps.to_dense(r), psi, atol=1e-12)
        assert r.discarded_weight < 1e-14

    def test_filled_triple_gains_phase(self):
        s = box_mps(7, 3, 5)
        psi = mps.to_dense(s)
        mps.apply_three_site_diagonal(s, 3, model.interaction_phases(ModelParams(L=7, W=2.0), 0.1))
        np.testing.assert_allclose(mps.to_dense(s), np.exp(-0.2j) * psi, atol=1e-14)
        np.testing.assert_array_equal(mps.density_mps(s), oracles.box_occ(7, 3, 5))

    @pytest.mark.parametrize("left,direction", [(1, "right"), (3, "left"), (6, "right"), (6, "left")])
    def test_matches_dense(self, left, direction):
        L = 8
        ph = np.exp(1j * np.random.default_rng(left).uniform(0, 2 * np.pi, 8))
        r = mps.from_dense(random_number_state(L, 4, left), L)
        psi = mps.to_dense(r)
        mps.apply_three_site_diagonal(r, left, ThreeSitePhases(ph, 0.0), direction)
        np.testing.assert_allclose(mps.to_dense(r), dense_three_site(L, left, ph) * psi, atol=1e-10)


class TestTebd:
    def test_zero_step(self):
        s = mps.from_dense(random_number_state(8, 3, 0), 8)
        psi = mps.to_dense(s)
        mps.tebd_step(s, ModelParams(L=8, W=1.0), mps.TebdSchedule(0.0))
        np.testing.assert_allclose(mps.to_dense(s), psi, atol=1e-14)

    @pytest.mark.parametrize("W", [0.0, 1.3])
    def test_second_order_step_matches_dense_splitting(self, W):
        L, dt = 8, 0.2
        s = mps.from_occupations(oracles.box_occ(L, 3, 6), svd_eps=0.0)
        psi = oracles.product_vector(oracles.box_occ(L, 3, 6))
        U = oracles.trotter2_step(L, 1.0, W, dt)
        for _ in range(4):
            mps.tebd_step(s, ModelParams(L=L, W=W), mps.TebdSchedule(dt))
            psi = U @ psi
        np.testing.assert_allclose(mps.to_dense(s), psi, atol=1e-10)

    def test_fourth_order_step_matches_dense_composition(self):
        L, dt, W = 7, 0.3, 2.0
        sched = mps.TebdSchedule(dt, order=4)
        s = mps.from_occupations(oracles.box_occ(L, 2, 4), svd_eps=0.0)
        psi = oracles.product_vector(oracles.box_occ(L, 2, 4))
        for tau in sched.substeps:
            psi = oracles.trotter2_step(L, 1.0, W, tau) @ psi
        mps.tebd_step(s, ModelParams(L=L, W=W), sched)
        np.testing.assert_allclose(mps.to_dense(s), psi, atol=1e-10)

    def test_one_step_against_exact_propagator(self):
        # the second-order local error at dt = 0.05 is ~8e-6 in the density
        # here, so the oracle comparison uses the fourth-order schedule
        L, W, dt = 12, 3.0, 0.05
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, 4)
        exact = fock.ExactPropagator(model.hamiltonian(p, b)).evolve(fock.box_state(b, 5, 8), dt)
        s = box_mps(L, 5, 8, chi_max=256)
        mps.tebd_step(s, p, mps.TebdSchedule(dt, order=4))
        assert np.max(np.abs(mps.density_mps(s) - fock.density(exact))) <= 1e-6

    def test_against_exact_engine(self):
        L, W, dt, t = 12, 1.0, 0.05, 4.0
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, 4)
        exact = fock.ExactPropagator(model.hamiltonian(p, b)).evolve(fock.box_state(b, 5, 8), t)
        s = box_mps(L, 5, 8, chi_max=256)
        sched = mps.TebdSchedule(dt, order=4)
        for _ in range(int(round(t / dt))):
            mps.tebd_step(s, p, sched)
        m = mps.measure(s)
        assert np.max(np.abs(m.density - fock.density(exact))) <= 1e-5
        assert abs(m.half_current(1.0) - fock.half_current(exact, 1.0)) <= 1e-5

    def test_free_expansion_matches_free_fermions(self):
        # second order at dt = 0.1 is off by 8e-4 here (pure splitting error,
        # it drops fourfold at dt = 0.05); fourth order reaches ~3e-7
        L, t, dt = 60, 5.0, 0.1
        p = ModelParams(L=L)
        s = box_mps(L, 26, 35)
        for _ in range(int(round(t / dt))):
            mps.tebd_step(s, p, mps.TebdSchedule(dt, order=4))
        C = ff.evolve_correlation(ff.from_occupations(oracles.box_occ(L, 26, 35)), p, t)
        assert np.max(np.abs(mps.density_mps(s) - ff.density_from_correlation(C))) <= 2e-4

    def test_trotter_error_is_second_order(self):
        L, W = 12, 1.0
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, 4)
        prop = fock.ExactPropagator(model.hamiltonian(p, b))
        psi0 = fock.box_state(b, 5, 8)
        idx = oracles.sector(L, 4)

        def one_step_error(dt):
            s = box_mps(L, 5, 8, svd_eps=0.0)
            mps.tebd_step(s, p, mps.TebdSchedule(dt))
            return np.linalg.norm(mps.to_dense(s)[idx] - prop.evolve(psi0, dt).amplitudes)

        ratio = one_step_error(0.1) / one_step_error(0.05)
        assert 6 <= ratio <= 10

    def test_global_error_is_second_order(self):
        # at fixed t the accumulated splitting error scales as dt^2
        L, W, t = 12, 1.0, 4.0
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, 4)
        ref = fock.density(fock.ExactPropagator(model.hamiltonian(p, b)).evolve(fock.box_state(b, 5, 8), t))

        def error(dt):
            s = box_mps(L, 5, 8, svd_eps=0.0)
            for _ in range(int(round(t / dt))):
                mps.tebd_step(s, p, mps.TebdSchedule(dt))
            return np.max(np.abs(mps.density_mps(s) - ref))

        ratio = error(0.1) / error(0.05)
        assert 3.5 <= ratio <= 4.5

    @given(occ=st.lists(st.integers(0, 1), min_size=5, max_size=10), W=st.floats(0, 3), seed=st.integers(0, 99))
    @settings(max_examples=15, deadline=None)
    def test_conserves_number_and_norm(self, occ, W, seed):
        s = mps.from_occupations(occ, chi_max=8, svd_eps=1e-6)
        p = ModelParams(L=len(occ), W=W)
        dt = 0.05 + 0.1 * (seed % 3)
        for _ in range(6):
            mps.tebd_step(s, p, mps.TebdSchedule(dt))
            assert abs(mps.norm(s) - 1) < 1e-12
        assert abs(mps.total_number(s) - sum(occ)) <= max(1e-8, 10 * s.discarded_weight)
        assert max(s.bond_dims) <= 8

    def test_truncation_is_logged(self):
        s = box_mps(14, 5, 10, chi_max=4, svd_eps=0.0)
        p = ModelParams(L=14, W=1.0)
        for _ in range(10):
            mps.tebd_step(s, p, mps.TebdSchedule(0.1))
        assert max(s.bond_dims) <= 4
        assert s.discarded_weight > 0
        assert abs(mps.norm(s) - 1) < 1e-12

    def test_centered_box_stays_reflection_symmetric(self):
        s = box_mps(20, 8, 13, chi_max=64)
        p = ModelParams(L=20, W=1.5)
        for _ in range(20):
            mps.tebd_step(s, p, mps.TebdSchedule(0.1))
        d = mps.density_mps(s)
        assert np.max(np.abs(d - d[::-1])) < 1e-6


class TestMeasure:
    def test_matches_dense(self):
        L = 9
        psi = random_number_state(L, 4, 7)
        m = mps.measure(mps.from_dense(psi, L))
        np.testing.assert_allclose(m.density, oracles.density(psi, L), atol=1e-12)
        for bond in range(1, L):
            assert abs(m.hopping[bond - 1] - oracles.hopping(psi, L, bond)) < 1e-12
            assert abs(m.entropies[bond - 1] - oracles.reduced_entropy(psi, L, bond)) < 1e-10

    def test_measure_leaves_state_alone(self):
        r = mps.random_mps(8, 4, seed=1)
        before = [A.copy() for A in r.tensors]
        mps.measure(r)
        for a, b in zip(before, r.tensors):
            np.testing.assert_array_equal(a, b)

    def test_product_state_has_no_entropy(self):
        m = mps.measure(box_mps(10, 3, 6))
        np.testing.assert_array_equal(m.entropies, np.zeros(9))

    def test_singlet_entropy(self):
        psi = np.zeros(4, dtype=complex)
        psi[0b01] = psi[0b10] = 2**-0.5
        # pad to three sites so the model constraints on L do not matter
        s = mps.from_dense(np.kron([1, 0], psi), 3)
        assert abs(mps.bond_entropy(s, 1) - math.log(2)) < 1e-12

    def test_real_state_has_no_current(self):
        psi = np.random.default_rng(0).standard_normal(2**8)
        psi /= np.linalg.norm(psi)
        assert abs(mps.half_current_mps(mps.from_dense(psi, 8), 1.0)) < 1e-12

    def test_entropy_after_expansion(self):
        L, W, t, dt = 12, 1.0, 3.0, 0.05
        s = box_mps(L, 5, 8, chi_max=256)
        sched = mps.TebdSchedule(dt, order=4)
        for _ in range(int(round(t / dt))):
            mps.tebd_step(s, ModelParams(L=L, W=W), sched)
        full = oracles.propagate(
            oracles.full_hamiltonian(L, 1.0, W), oracles.product_vector(oracles.box_occ(L, 5, 8)), t
        )
        for bond in (3, 6, 9):
            assert abs(mps.bond_entropy(s, bond) - oracles.reduced_entropy(full, L, bond)) < 1e-6

    def test_mid_evolution_matches_exact(self):
        L, W = 12, 2.0
        p = ModelParams(L=L, W=W)
        b = fock.enumerate_basis(L, 4)
        exact = fock.ExactPropagator(model.hamiltonian(p, b)).evolve(fock.box_state(b, 5, 8), 2.0)
        s = box_mps(L, 5, 8, chi_max=256)
        sched = mps.TebdSchedule(0.05, order=4)
        for _ in range(40):
            mps.tebd_step(s, p, sched)
        m = mps.measure(s)
        assert np.max(np.abs(m.density - fock.density(exact))) < 1e-6
        assert abs(m.half_current(1.0) - fock.half_current(exact, 1.0)) < 1e-6


class TestPairCreation:
    def test_vacuum(self):
        s, w = mps.apply_pair_creation_mps(mps.from_occupations([0] * 8), 4)
        assert w == 1
        np.testing.assert_array_equal(mps.density_mps(s), oracles.box_occ(8, 4, 5))

    def test_full_chain(self):
        with pytest.raises(QuenchError):
            mps.apply_pair_creation_mps(mps.from_occupations([1] * 6), 3)

    def test_weight_matches_exact(self):
        L = 12
        p = ModelParams(L=L, W=1.0)
        b = fock.enumerate_basis(L, 6)
        gs = fock.ground_state(model.hamiltonian(p, b), b)
        out, w = fock.apply_pair_creation(gs.state, 6)
        full = np.zeros(2**L, dtype=complex)
        full[oracles.sector(L, 6)] = gs.state.amplitudes
        s, w_mps = mps.apply_pair_creation_mps(mps.from_dense(full, L), 6)
        assert abs(w_mps - w) < 1e-8
        ref = np.zeros(2**L, dtype=complex)
        ref[oracles.sector(L, 8)] = out.amplitudes
        assert abs(abs(np.vdot(ref, mps.to_dense(s))) - 1) < 1e-10


class TestArrays:
    def test_round_trip_continues_identically(self):
        p = ModelParams(L=10, W=1.0)
        s = box_mps(10, 4, 7, chi_max=16, svd_eps=1e-6)
        for _ in range(5):
            mps.tebd_step(s, p, mps.TebdSchedule(0.1))
        t = mps.from_arrays(mps.to_arrays(s))
        assert t.center == s.center and t.discarded_weight == s.discarded_weight
        for _ in range(5):
            mps.tebd_step(s, p, mps.TebdSchedule(0.1))
            mps.tebd_step(t, p, mps.TebdSchedule(0.1))
        for a, b in zip(s.tensors, t.tensors):
            np.testing.assert_array_equal(a, b)
