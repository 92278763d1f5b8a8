import itertools

import numpy as np
import pytest

from bohmdirac import dirac
from bohmdirac.dirac import (DEFAULT_REP, MultiTimeWave, PlaneWaveMode,
                             SingleParticleWave)
from bohmdirac.errors import ArityMismatch, BadQuadrature, DegenerateMode


def svd_null_oracle(mat):
    """Independent null-space direction via SVD."""
    _, s, vt = np.linalg.svd(mat)
    assert s[-1] < 1e-12
    return vt[-1].conj()


def kron_current_oracle(psi_flat, events_n, rep=DEFAULT_REP):
    """Brute-force current tensor via explicit Kronecker matrices."""
    n = events_n
    gams = [rep.gamma0, rep.gamma1]
    out = np.empty((2,) * n)
    for idx in itertools.product((0, 1), repeat=n):
        mat = np.array([[1.0]], dtype=complex)
        for mu in idx:
            mat = np.kron(mat, rep.gamma0 @ gams[mu])
        out[idx] = (psi_flat.conj() @ mat @ psi_flat).real
    return out


def tensor_assembly_oracle(wave, events):
    """Independent evaluation of the multi-time wave by explicit index loops."""
    n = wave.n_particles
    out = np.zeros((2,) * n, dtype=complex)
    for coeff, factors in wave.terms:
        vals = [dirac.eval_single(f, tuple(e)) for f, e in zip(factors, events)]
        for idx in itertools.product((0, 1), repeat=n):
            prod = coeff
            for j, i in enumerate(idx):
                prod = prod * vals[j][i]
            out[idx] += prod
    return out


class TestRepresentation:
    def test_clifford_relations(self):
        assert DEFAULT_REP.clifford_residual() == 0.0

    def test_transformed_rep_still_clifford(self):
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        rep2 = dirac.transformed_rep(h)
        assert rep2.clifford_residual() < 1e-14


class TestSpinors:
    def test_rest_spinor(self):
        assert np.allclose(dirac.spinor_u(0.0, 1.0), [1.0, 0.0])
        assert np.allclose(dirac.spinor_v(0.0, 1.0), [0.0, 1.0])

    def test_defining_relation_u(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            k = rng.normal() * 3
            m = abs(rng.normal()) + 0.05
            e = np.hypot(k, m)
            u = dirac.spinor_u(k, m)
            mat = DEFAULT_REP.gamma0 * e - DEFAULT_REP.gamma1 * k - m * np.eye(2)
            assert np.linalg.norm(mat @ u) < 1e-12
            # direction agrees with an independent SVD null-space solve
            ref = svd_null_oracle(mat)
            assert abs(abs(np.vdot(ref, u)) - 1.0) < 1e-10

    def test_defining_relation_v(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            k = rng.normal() * 3
            m = abs(rng.normal()) + 0.05
            e = np.hypot(k, m)
            v = dirac.spinor_v(k, m)
            mat = DEFAULT_REP.gamma0 * e + DEFAULT_REP.gamma1 * k + m * np.eye(2)
            assert np.linalg.norm(mat @ v) < 1e-12

    def test_orthogonality_same_k(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            k = rng.normal() * 4
            m = abs(rng.normal()) + 0.05
            u = dirac.spinor_u(k, m)
            v = dirac.spinor_v(k, m)
            assert abs(np.vdot(u, v)) < 1e-12
            assert np.vdot(u, u).real == pytest.approx(1.0)
            assert np.vdot(v, v).real == pytest.approx(1.0)

    def test_degenerate_mode(self):
        with pytest.raises(DegenerateMode):
            dirac.spinor_u(0.0, 0.0)


def single_mode_wave(k, m=1.0, sign=+1, amp=1.0):
    return SingleParticleWave(mass=m, modes=(PlaneWaveMode(k, sign, amp),))


class TestEvalSingle:
    def test_rest_mode_phase(self):
        w = single_mode_wave(0.0)
        for t, x in [(0.0, 0.0), (0.7, -1.2), (2.0, 3.0)]:
            val = dirac.eval_single(w, (t, x))
            assert np.allclose(val, [np.exp(-1j * t), 0.0])

    def test_zero_amplitudes(self):
        w = SingleParticleWave(mass=1.0, modes=(PlaneWaveMode(0.3, +1, 0.0),))
        assert np.allclose(dirac.eval_single(w, (0.4, 0.2)), 0.0)

    def test_superposition_is_sum_of_modes(self):
        m1 = PlaneWaveMode(0.4, +1, 0.7 + 0.1j)
        m2 = PlaneWaveMode(-1.1, -1, 0.3 - 0.2j)
        w12 = SingleParticleWave(mass=1.0, modes=(m1, m2))
        w1 = SingleParticleWave(mass=1.0, modes=(m1,))
        w2 = SingleParticleWave(mass=1.0, modes=(m2,))
        e = (0.37, -0.83)
        assert np.allclose(dirac.eval_single(w12, e),
                           dirac.eval_single(w1, e) + dirac.eval_single(w2, e))

    def test_negative_energy_phase_convention(self):
        # v-mode of momentum k carries exp(+i(E x0 + k x1))
        k, m = 0.8, 1.0
        e = np.hypot(k, m)
        w = single_mode_wave(k, m, sign=-1)
        x0, x1 = 0.9, -0.4
        expected = dirac.spinor_v(k, m) * np.exp(1j * (e * x0 + k * x1))
        assert np.allclose(dirac.eval_single(w, (x0, x1)), expected)

    def test_modes_solve_dirac_equation_exactly(self):
        rng = np.random.default_rng(10)
        for sign in (+1, -1):
            w = SingleParticleWave(mass=1.3, modes=(
                PlaneWaveMode(0.9, sign, 1.0), PlaneWaveMode(-0.4, sign, 0.5j)))
            for _ in range(5):
                r = dirac.dirac_residual(w, tuple(rng.normal(0, 2, 2)), h=1e-5)
                assert r < 1e-8


class TestEvalMulti:
    def test_product_state_outer_product(self):
        wa = single_mode_wave(0.5)
        wb = single_mode_wave(-0.3)
        wave = MultiTimeWave.product([wa, wb], coeff=1.0)
        events = [(0.2, 0.4), (-0.1, 1.0)]
        psi = dirac.eval_multi(wave, events)
        outer = np.outer(dirac.eval_single(wa, events[0]),
                         dirac.eval_single(wb, events[1]))
        assert np.allclose(psi, outer)

    def test_single_particle_reduces_to_eval_single(self):
        w = single_mode_wave(0.7)
        wave = MultiTimeWave.product([w])
        e = (0.3, -0.6)
        assert np.allclose(dirac.eval_multi(wave, [e]), dirac.eval_single(w, e))

    def test_entangled_state_matches_assembly_oracle(self, entangled_wave):
        events = [(0.15, -2.1), (0.4, 1.7)]
        psi = dirac.eval_multi(entangled_wave, events)
        ref = tensor_assembly_oracle(entangled_wave, events)
        assert np.allclose(psi, ref, atol=1e-13)

    def test_arity_mismatch(self, entangled_wave):
        with pytest.raises(ArityMismatch):
            dirac.eval_multi(entangled_wave, [(0.0, 0.0)])


class TestCurrentTensor:
    def test_rest_mode_current(self):
        wave = MultiTimeWave.product([single_mode_wave(0.0)])
        j = dirac.current_tensor(wave, [(0.0, 0.0)]).components
        assert j[0] == pytest.approx(1.0, abs=1e-12)
        assert j[1] == pytest.approx(0.0, abs=1e-12)

    def test_plane_wave_velocity_ratio(self):
        k, m = 1.3, 1.0
        wave = MultiTimeWave.product([single_mode_wave(k, m)])
        j = dirac.current_tensor(wave, [(0.6, -0.2)]).components
        assert j[1] / j[0] == pytest.approx(k / np.hypot(k, m), abs=1e-12)

    def test_two_particle_product_of_rest_states(self):
        wave = MultiTimeWave.product([single_mode_wave(0.0), single_mode_wave(0.0)])
        j = dirac.current_tensor(wave, [(0.0, 0.3), (0.0, -0.4)]).components
        expected = np.zeros((2, 2))
        expected[0, 0] = 1.0
        assert np.allclose(j, expected, atol=1e-12)

    def test_against_kron_oracle(self, entangled_wave):
        events = [(0.2, -2.0), (-0.3, 1.4)]
        psi = dirac.eval_multi(entangled_wave, events)
        j = dirac.current_tensor(entangled_wave, events).components
        ref = kron_current_oracle(psi.reshape(-1), 2)
        assert np.allclose(j, ref, atol=1e-12)

    def test_reality_at_million_random_configurations(self, entangled_wave):
        rng = np.random.default_rng(11)
        w = DEFAULT_REP.w_matrices()
        worst = 0.0
        scale = 0.0
        for _ in range(10):  # 10 x 100k configurations
            x0 = rng.uniform(-2, 2, (100_000, 2))
            x1 = rng.uniform(-4, 4, (100_000, 2))
            psi = dirac.psi_tensor(entangled_wave, x0, x1)
            cur = np.einsum("mac,uab,vcd,mbd->muv", psi.conj(), w, w, psi)
            worst = max(worst, float(np.abs(cur.imag).max()))
            scale = max(scale, float(np.abs(cur).max()))
        assert worst < 1e-12 * scale

    def test_representation_independence(self, entangled_wave):
        # currents are invariant under a unitary change of gamma representation
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        rep2 = dirac.transformed_rep(h)
        factors2 = tuple(
            (c, tuple(SingleParticleWave(f.mass, f.modes, rep=rep2) for f in fs))
            for c, fs in entangled_wave.terms)
        wave2 = MultiTimeWave(entangled_wave.masses, factors2)
        events = [(0.25, -2.2), (0.1, 1.6)]
        j1 = dirac.current_tensor(entangled_wave, events).components
        j2 = dirac.current_tensor(wave2, events, rep=rep2).components
        assert np.allclose(j1, j2, atol=1e-12)

    def test_positivity_of_normal_contraction(self, entangled_wave, appendix_spec):
        rng = np.random.default_rng(12)
        ts = rng.uniform(-2, 2, 400)
        xs = rng.uniform(-3, 3, (400, 2))
        from bohmdirac.dynamics import slot_currents_batch
        for t, y in zip(ts, xs):
            _, d = slot_currents_batch(entangled_wave, appendix_spec, t, y[None, :])
            assert d[0] >= -1e-12


class TestResiduals:
    def test_dirac_residual_small(self, entangled_wave):
        fac = entangled_wave.terms[0][1][0]
        assert dirac.dirac_residual(fac, (0.3, -0.2), h=1e-4) < 1e-7

    def test_dirac_residual_quarters_when_h_halves(self, entangled_wave):
        fac = entangled_wave.terms[0][1][0]
        r1 = dirac.dirac_residual(fac, (0.4, 0.1), h=2e-3)
        r2 = dirac.dirac_residual(fac, (0.4, 0.1), h=1e-3)
        assert r1 / r2 == pytest.approx(4.0, rel=0.05)

    def test_residual_scales_linearly_with_amplitude(self):
        w1 = SingleParticleWave(mass=1.0, modes=(
            PlaneWaveMode(0.7, +1, 1.0), PlaneWaveMode(-0.2, -1, 0.4)))
        w3 = SingleParticleWave(mass=1.0, modes=(
            PlaneWaveMode(0.7, +1, 3.0), PlaneWaveMode(-0.2, -1, 1.2)))
        e = (0.5, 0.7)
        assert dirac.dirac_residual(w3, e, 1e-3) == pytest.approx(
            3.0 * dirac.dirac_residual(w1, e, 1e-3), rel=1e-9)

    def test_continuity_residual_single_mode(self):
        wave = MultiTimeWave.product([single_mode_wave(0.9)])
        r = dirac.continuity_residual(wave, [(0.1, 0.2)], slot=0, h=1e-4)
        assert abs(float(r)) < 1e-7

    def test_continuity_residual_two_particles(self, entangled_wave):
        r = dirac.continuity_residual(entangled_wave, [(0.2, -2.1), (0.0, 1.5)],
                                      slot=1, h=1e-4)
        scale = np.abs(dirac.current_tensor(
            entangled_wave, [(0.2, -2.1), (0.0, 1.5)]).components).max()
        assert np.abs(r).max() < 1e-6 * max(scale, 1e-3)

    def test_continuity_residual_zero_wave(self):
        w = SingleParticleWave(mass=1.0, modes=(PlaneWaveMode(0.5, +1, 0.0),))
        wave = MultiTimeWave.product([w])
        r = dirac.continuity_residual(wave, [(0.0, 0.0)], slot=0)
        assert float(r) == 0.0


class TestGaussianPacket:
    def test_window_mass_captured(self):
        w = dirac.gaussian_packet(1.0, 0.0, 1.0, 64)
        assert dirac.window_mass(w, (-20, 20)) >= 1.0 - 1e-8

    def test_moving_packet_still_captured(self):
        w = dirac.gaussian_packet(1.0, 0.8, 1.0, 64, x_center=-2.0)
        assert dirac.window_mass(w, (-20, 20), t=2.0) >= 1.0 - 1e-8

    def test_current_odd_symmetric_at_center(self):
        w = dirac.gaussian_packet(1.0, 0.0, 1.0, 64)
        xs = np.linspace(0.1, 3.0, 40)
        psi_r = w.eval(np.zeros_like(xs), xs)
        psi_l = w.eval(np.zeros_like(xs), -xs)
        w1 = DEFAULT_REP.w_matrices()[1]
        j_r = np.einsum("xa,ab,xb->x", psi_r.conj(), w1, psi_r).real
        j_l = np.einsum("xa,ab,xb->x", psi_l.conj(), w1, psi_l).real
        assert np.allclose(j_r, -j_l, atol=1e-12)

    def test_single_mode_limit(self):
        w = dirac.gaussian_packet(1.0, 0.7, 1.0, 8, k_window=1e-9)
        ref = single_mode_wave(0.7)
        xs = np.linspace(-2, 2, 17)
        a = w.eval(np.zeros_like(xs), xs)
        b = ref.eval(np.zeros_like(xs), xs)
        ratio = a[:, 0] / b[:, 0]
        assert np.max(np.abs(ratio / ratio[0] - 1.0)) < 1e-6

    def test_too_few_modes(self):
        with pytest.raises(BadQuadrature):
            dirac.gaussian_packet(1.0, 0.0, 1.0, 7)

    def test_x_center_shifts_density(self):
        w = dirac.gaussian_packet(1.0, 0.0, 1.0, 64, x_center=3.0)
        xs = np.linspace(-8, 8, 801)
        psi = w.eval(np.zeros_like(xs), xs)
        rho = np.einsum("xc,xc->x", psi.conj(), psi).real
        assert abs(xs[np.argmax(rho)] - 3.0) < 0.1


class TestMultiTimeWaveValidation:
    def test_mass_mismatch(self):
        with pytest.raises(ValueError):
            MultiTimeWave(masses=(1.0, 2.0),
                          terms=((1.0, (single_mode_wave(0.1, m=1.0),
                                        single_mode_wave(0.2, m=1.0))),))

    def test_factor_count_mismatch(self):
        with pytest.raises(ArityMismatch):
            MultiTimeWave(masses=(1.0, 1.0),
                          terms=((1.0, (single_mode_wave(0.1),)),))
