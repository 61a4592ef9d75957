import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecmm.bath import DiscretizedBath, Ohmic, discretize, sample_wigner_thermal
from ecmm.dynamics import (
    IntegratorConfig,
    PropagationError,
    SpinBosonSystem,
    TrajectoryState,
    bath_potential,
    constraint_norm,
    default_dt,
    electronic_rotation,
    nuclear_force,
    potential_matrix,
    propagate,
    step_ehrenfest,
    step_mm,
    total_energy,
)
from ecmm.mapping import ElectronicPhasePoint, MappingSpace
from ecmm.oracles import propagate_exact, rabi_populations
from ecmm.sampling import sample_ehrenfest_initial, sample_uniform_constraint

from conftest import GAMMAS, decoupled_system

SQ2 = math.sqrt(2.0)


def one_mode(c=0.7, w=1.3):
    return SpinBosonSystem(1.0, 1.0, DiscretizedBath(np.array([w]), np.array([c])))


def focused(n_states=2, state=0):
    x = np.zeros(n_states)
    x[state] = SQ2
    return ElectronicPhasePoint(x, np.zeros(n_states))


class TestModel:
    def test_potential_matrix_examples(self):
        s = SpinBosonSystem(1.0, 1.0, DiscretizedBath(np.array([1.0]), np.array([1.0])))
        np.testing.assert_array_equal(potential_matrix(s, [0.0]), [[1, 1], [1, -1]])
        np.testing.assert_array_equal(potential_matrix(s, [0.5]), [[1.5, 1], [1, -1.5]])
        with pytest.raises(ValueError):
            potential_matrix(s, [0.0, 1.0])

    def test_potential_is_traceless(self, rng):
        s = SpinBosonSystem(0.3, 1.1, discretize(Ohmic(0.4, 2.5), 7))
        V = potential_matrix(s, rng.normal(size=(20, 7)))
        np.testing.assert_allclose(np.trace(V, axis1=-2, axis2=-1), 0.0, atol=1e-14)

    def test_bath_potential(self):
        s = one_mode(w=2.0)
        assert bath_potential(s, [0.5]) == pytest.approx(0.5)

    def test_force_examples(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 5))
        R = rng.normal(size=5)
        w, c = s.bath.omega, s.bath.c
        st = TrajectoryState(R, np.zeros(5), focused())
        np.testing.assert_allclose(nuclear_force(s, st, 0.0), -w**2 * R - c, atol=1e-14)
        # equal actions on both states: sigma_z weight vanishes for any gamma
        z = ElectronicPhasePoint(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        for g in GAMMAS:
            np.testing.assert_allclose(nuclear_force(s, TrajectoryState(R, np.zeros(5), z), g), -w**2 * R, atol=1e-14)

    def test_force_is_minus_energy_gradient(self, rng):
        s = SpinBosonSystem(0.4, 0.9, discretize(Ohmic(0.4, 2.5), 4))
        space = MappingSpace(2, 0.5)
        z = sample_uniform_constraint(space, rng)
        R = rng.normal(size=4)
        st = TrajectoryState(R, rng.normal(size=4), z)
        h = 1e-6
        grad = []
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            up = total_energy(s, TrajectoryState(R + e, st.P, z), space.gamma)
            dn = total_energy(s, TrajectoryState(R - e, st.P, z), space.gamma)
            grad.append((up - dn) / (2 * h))
        np.testing.assert_allclose(nuclear_force(s, st, space.gamma), -np.array(grad), atol=1e-7)

    def test_total_energy_examples(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.1, 1.0), 3))
        st = TrajectoryState(np.zeros(3), np.zeros(3), focused())
        assert total_energy(s, st, 0.0) == pytest.approx(1.0)
        s0 = SpinBosonSystem(0.8, 0.0, DiscretizedBath(np.array([1.0, 2.0]), np.zeros(2)))
        z = sample_uniform_constraint(MappingSpace(2, 0.3), rng)
        R, P = rng.normal(size=2), rng.normal(size=2)
        expect = 0.5 * P @ P + 0.5 * np.sum((s0.bath.omega * R) ** 2) + 0.8 * (z.actions[0] - z.actions[1])
        assert total_energy(s0, TrajectoryState(R, P, z), 0.3) == pytest.approx(expect)

    def test_norm_right_after_sampling(self, rng):
        for g in GAMMAS:
            space = MappingSpace(2, g)
            st = TrajectoryState(np.zeros(1), np.zeros(1), sample_uniform_constraint(space, rng))
            assert constraint_norm(st) == pytest.approx(space.radius2, rel=1e-15)

    def test_default_dt_rule(self):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 100))
        assert default_dt(s) == pytest.approx(0.05 / s.bath.omega_max)
        s = decoupled_system(eps=3.0, delta=4.0)
        assert default_dt(s) == pytest.approx(0.01)

    def test_integrator_config(self):
        cfg = IntegratorConfig(0.1, 1.0, 2)
        assert cfg.n_records == 5
        np.testing.assert_allclose(cfg.times, np.arange(6) * 0.2)
        assert np.all(np.diff(cfg.times) > 0)
        for bad in ((0.0, 1.0, 1), (0.1, -1.0, 1), (0.1, 1.0, 0)):
            with pytest.raises(ValueError):
                IntegratorConfig(*bad)
        with pytest.warns(RuntimeWarning):
            IntegratorConfig(0.3, 1.0).check(one_mode(w=1.0))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            IntegratorConfig(0.1, 1.0).check(one_mode(w=1.0))


class TestElectronicRotation:
    def test_zero_potential_is_identity(self, rng):
        z = sample_uniform_constraint(MappingSpace(3, 0.2), rng)
        out = electronic_rotation(np.zeros((3, 3)), 1.3, z)
        np.testing.assert_allclose(out.x, z.x, atol=1e-15)
        np.testing.assert_allclose(out.p, z.p, atol=1e-15)

    def test_full_period_recurrence(self):
        out = electronic_rotation([[1, 1], [1, -1]], math.pi / SQ2, focused())
        assert out.actions[1] == pytest.approx(0.0, abs=1e-14)
        assert out.actions[0] == pytest.approx(1.0, abs=1e-14)

    @given(st.integers(2, 4), st.floats(-5, 5), st.integers(0, 2**32 - 1))
    def test_unitary_and_matches_oracle(self, F, dt, seed):
        r = np.random.default_rng(seed)
        A = r.normal(size=(F, F))
        V = A + A.T
        z = sample_uniform_constraint(MappingSpace(F, 0.0), r)
        out = electronic_rotation(V, dt, z)
        assert out.norm2() == pytest.approx(z.norm2(), rel=1e-14)
        np.testing.assert_allclose(out.amplitudes, propagate_exact(V, z.amplitudes, dt), atol=1e-12)

    def test_rejects_non_symmetric(self):
        with pytest.raises(ValueError):
            electronic_rotation([[0, 1], [0, 0]], 0.1, focused())


class TestIntegrator:
    def test_decoupled_bath_is_exact_harmonic_motion(self):
        s = SpinBosonSystem(1.0, 1.0, DiscretizedBath(np.array([1.7]), np.zeros(1)))
        st = TrajectoryState(np.array([0.4]), np.array([-0.3]), focused())
        out = propagate(s, st, 0.0, 0.05, 200)
        t = 10.0
        R = 0.4 * math.cos(1.7 * t) - 0.3 / 1.7 * math.sin(1.7 * t)
        assert out.R[0] == pytest.approx(R, abs=1e-12)
        _, P2 = rabi_populations(1.0, 1.0, t)
        assert out.z.actions[1] == pytest.approx(P2, abs=1e-12)

    def test_second_order_convergence(self):
        s = one_mode()
        z0 = ElectronicPhasePoint(np.array([1.1, 0.3]), np.array([-0.2, 0.5]))
        st0 = TrajectoryState(np.array([0.5]), np.array([0.2]), z0)
        T = 2.0

        def run(dt):
            out = propagate(s, st0, 0.0, dt, int(round(T / dt)))
            return np.concatenate([out.R, out.P, out.z.actions])

        ref = run(0.005 / 32)
        dts = np.array([0.04, 0.02, 0.01, 0.005])
        err = np.array([np.max(np.abs(run(dt) - ref)) for dt in dts])
        slope = np.polyfit(np.log(dts), np.log(err), 1)[0]
        assert abs(slope - 2.0) < 0.1

    def test_time_reversal(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 10))
        space = MappingSpace(2, 0.5)
        b = sample_wigner_thermal(s.bath, 0.25, rng)
        st0 = TrajectoryState(b.R, b.P, sample_uniform_constraint(space, rng))
        dt = default_dt(s)
        fwd = propagate(s, st0, space.gamma, dt, 50)
        back = propagate(s, fwd, space.gamma, -dt, 50)
        for a, b_ in ((back.R, st0.R), (back.P, st0.P), (back.z.x, st0.z.x), (back.z.p, st0.z.p)):
            np.testing.assert_allclose(a, b_, atol=1e-10)

    def test_single_steps_match_fused_propagation(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 6))
        space = MappingSpace(2, 0.0)
        st = TrajectoryState(rng.normal(size=6), rng.normal(size=6), sample_uniform_constraint(space, rng))
        stepped = st
        for _ in range(20):
            stepped = step_mm(s, stepped, 0.0, 0.01)
        fused = propagate(s, st, 0.0, 0.01, 20)
        np.testing.assert_allclose(stepped.R, fused.R, atol=1e-12)
        np.testing.assert_allclose(stepped.z.x, fused.z.x, atol=1e-12)
        assert stepped.t == pytest.approx(0.2)

    def test_frozen_nuclei_match_matrix_exponential(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 8))
        R = rng.normal(size=8)
        z = sample_uniform_constraint(MappingSpace(2, -0.2), rng)
        st = TrajectoryState(R, np.zeros(8), z)
        V = potential_matrix(s, R)
        t = 50 / s.tunneling_frequency
        out = propagate(s, st, -0.2, t / 1000, 1000, freeze_nuclei=True)
        np.testing.assert_allclose(np.abs(out.z.amplitudes) ** 2, np.abs(propagate_exact(V, z.amplitudes, t)) ** 2,
                                   atol=1e-8)
        np.testing.assert_array_equal(out.R, R)

    def test_norm_conservation_long_run(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 20))
        space = MappingSpace(2, 1.0)
        b = sample_wigner_thermal(s.bath, 0.25, rng, size=4)
        st = TrajectoryState(b.R, b.P, sample_uniform_constraint(space, rng, size=4))
        out = propagate(s, st, 1.0, default_dt(s), 100_000, compiled=True)
        drift = np.abs(constraint_norm(out) - constraint_norm(st)) / constraint_norm(st)
        assert np.all(drift < 1e-12)

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_energy_drift_at_default_dt(self, gamma, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 50))
        space = MappingSpace(2, gamma)
        b = sample_wigner_thermal(s.bath, 0.25, rng, size=50)
        st = TrajectoryState(b.R, b.P, sample_uniform_constraint(space, rng, size=50))
        E0 = total_energy(s, st, gamma)
        worst = 0.0
        for _ in range(10):
            st = propagate(s, st, gamma, default_dt(s), 1000, compiled=True)
            worst = max(worst, np.max(np.abs(total_energy(s, st, gamma) - E0) / np.abs(E0)))
        assert worst < 1e-6

    def test_compiled_matches_numpy(self, rng):
        s = SpinBosonSystem(0.5, 1.0, discretize(Ohmic(0.4, 2.5), 12))
        space = MappingSpace(2, 0.366)
        b = sample_wigner_thermal(s.bath, 1.0, rng, size=7)
        st = TrajectoryState(b.R, b.P, sample_uniform_constraint(space, rng, size=7))
        a = propagate(s, st, space.gamma, 0.01, 300, compiled=True)
        n = propagate(s, st, space.gamma, 0.01, 300, compiled=False)
        np.testing.assert_allclose(a.R, n.R, atol=1e-11)
        np.testing.assert_allclose(a.z.x, n.z.x, atol=1e-11)

    def test_nan_is_detected(self):
        s = one_mode()
        st = TrajectoryState(np.array([np.nan]), np.array([0.0]), focused())
        with pytest.raises(PropagationError):
            propagate(s, st, 0.0, 0.01, 3)
        bad = propagate(s, st, 0.0, 0.01, 3, check_finite=False)
        assert not bad.is_finite()

    def test_mismatched_state(self):
        with pytest.raises(ValueError):
            propagate(one_mode(), TrajectoryState(np.zeros(2), np.zeros(2), focused()), 0.0, 0.01, 1)


class TestEhrenfest:
    def test_decoupled_follows_rabi(self, rng):
        s = decoupled_system()
        z = sample_ehrenfest_initial(2, 0, rng)
        st = TrajectoryState(np.zeros(1), np.zeros(1), z)
        for k in range(1, 6):
            st = propagate(s, st, 0.0, 0.01, 100)
            _, P2 = rabi_populations(1.0, 1.0, st.t)
            assert st.z.actions[1] == pytest.approx(P2, abs=1e-12)

    def test_step_is_gamma_zero_mapping_step(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 5))
        st = TrajectoryState(rng.normal(size=5), rng.normal(size=5), sample_ehrenfest_initial(2, 0, rng))
        a = step_ehrenfest(s, st, 0.02)
        b = step_mm(s, st, 0.0, 0.02)
        np.testing.assert_array_equal(a.z.x, b.z.x)

    def test_populations_stay_in_unit_interval(self, rng):
        s = SpinBosonSystem(1.0, 1.0, discretize(Ohmic(0.4, 2.5), 20))
        b = sample_wigner_thermal(s.bath, 0.25, rng, size=30)
        st = TrajectoryState(b.R, b.P, sample_ehrenfest_initial(2, 0, rng, size=30))
        for _ in range(20):
            st = propagate(s, st, 0.0, default_dt(s), 100, compiled=True)
            pops = st.z.actions
            assert np.all((pops >= -1e-12) & (pops <= 1 + 1e-12))
            np.testing.assert_allclose(pops.sum(axis=1), 1.0, atol=1e-12)
