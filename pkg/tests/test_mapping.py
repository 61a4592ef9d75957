import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecmm.mapping import (
    ConstraintViolation,
    ElectronicPhasePoint,
    MappingSpace,
    inverse_kernel,
    kernel,
    op_to_adjoint_function,
    op_to_function,
    sphere_moment2,
    sphere_moment4,
    trace_product_mc,
)
from ecmm.oracles import trace_product_direct
from ecmm.sampling import sample_uniform_constraint

from conftest import GAMMAS

SQ2 = math.sqrt(2.0)


def point(x, p=None):
    x = np.asarray(x, dtype=float)
    return ElectronicPhasePoint(x, np.zeros_like(x) if p is None else np.asarray(p, dtype=float))


def spaces():
    return st.tuples(st.integers(1, 5), st.floats(0.0, 1.0)).map(
        # spread gamma over (-1/F, 2]
        lambda t: MappingSpace(t[0], -1.0 / t[0] + 1e-3 + t[1] * (2.0 + 1.0 / t[0]))
    )


class TestMappingSpace:
    @pytest.mark.parametrize("F,gamma", [(2, -0.5), (2, -0.7), (3, -1 / 3), (1, -1.0)])
    def test_rejects_gamma_at_or_below_bound(self, F, gamma):
        with pytest.raises(ValueError):
            MappingSpace(F, gamma)

    def test_rejects_bad_state_count(self):
        with pytest.raises(ValueError):
            MappingSpace(0, 0.0)
        with pytest.raises(ValueError):
            MappingSpace(2.5, 0.0)

    def test_gamma_zero_coefficients(self):
        for F in range(1, 6):
            s = MappingSpace(F, 0.0)
            assert s.z1 == 1 + F
            assert s.z2 == 1.0

    @pytest.mark.parametrize("gamma,z1,z2", [(0.0, 3.0, 1.0), (0.5, 0.75, 0.25), (-0.2, 25 / 3, 2.0)])
    def test_coefficients_F2(self, gamma, z1, z2):
        s = MappingSpace(2, gamma)
        assert s.z1 == pytest.approx(z1, rel=1e-14)
        assert s.z2 == pytest.approx(z2, rel=1e-14)
        assert s.radius2 == pytest.approx(2 * (1 + 2 * gamma))


class TestKernels:
    def test_focused_point_projector(self):
        s = MappingSpace(2, 0.0)
        np.testing.assert_allclose(kernel(s, point([SQ2, 0])), [[1, 0], [0, 0]], atol=1e-15)

    @pytest.mark.parametrize(
        "gamma,x,K,Kinv",
        [
            (0.0, [SQ2, 0], [[1, 0], [0, 0]], [[2, 0], [0, -1]]),
            (0.5, [2, 0], [[1.5, 0], [0, -0.5]], [[1.25, 0], [0, -0.25]]),
            (-0.2, [math.sqrt(1.2), 0], [[0.8, 0], [0, 0.2]], [[3, 0], [0, -2]]),
        ],
    )
    def test_worked_examples(self, gamma, x, K, Kinv):
        s = MappingSpace(2, gamma)
        z = point(x)
        np.testing.assert_allclose(kernel(s, z), K, atol=1e-14)
        np.testing.assert_allclose(inverse_kernel(s, z), Kinv, atol=1e-13)

    def test_off_constraint_raises_with_radius(self):
        s = MappingSpace(2, 0.0)
        with pytest.raises(ConstraintViolation) as info:
            kernel(s, point([1.0, 0.0]))
        assert info.value.measured == pytest.approx(1.0)
        assert info.value.expected == pytest.approx(2.0)
        with pytest.raises(ConstraintViolation):
            inverse_kernel(s, point([3.0, 0.0]))

    @given(spaces(), st.integers(0, 2**32 - 1))
    def test_traces_are_one(self, space, seed):
        z = sample_uniform_constraint(space, np.random.default_rng(seed), size=16)
        F = space.num_states
        # near gamma = -1/F the diagonal terms grow like 1/(1 + F gamma) and cancel
        tol = 1e-12 * max(1.0, F * abs(space.z2), F * abs(space.gamma))
        for K in (kernel(space, z), inverse_kernel(space, z)):
            np.testing.assert_allclose(np.trace(K, axis1=-2, axis2=-1), 1.0, rtol=0, atol=tol)
            np.testing.assert_allclose(K, np.swapaxes(K, -1, -2).conj(), atol=1e-14)

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_resolution_of_identity(self, gamma, rng):
        s = MappingSpace(2, gamma)
        n = 50_000
        z = sample_uniform_constraint(s, rng, size=n)
        for K in (kernel(s, z), inverse_kernel(s, z)):
            mean = 2 * K.mean(axis=0)
            se = 2 * np.sqrt((K.real.var(axis=0, ddof=1) + K.imag.var(axis=0, ddof=1)) / n)
            assert np.all(np.abs(mean - np.eye(2)) <= 3 * se + 1e-12)


class TestCorrespondence:
    def test_identity_maps_to_one(self, rng):
        for g in GAMMAS:
            s = MappingSpace(3, g)
            z = sample_uniform_constraint(s, rng, size=8)
            np.testing.assert_allclose(op_to_function(s, np.eye(3), z), 1.0, atol=1e-12)
            np.testing.assert_allclose(op_to_adjoint_function(s, np.eye(3), z), 1.0, atol=1e-12)

    def test_examples(self):
        s = MappingSpace(2, 0.0)
        P1 = np.diag([1.0, 0.0])
        P2 = np.diag([0.0, 1.0])
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        z = point([SQ2, 0])
        assert op_to_function(s, P1, z) == pytest.approx(1.0)
        assert op_to_adjoint_function(s, P1, z) == pytest.approx(2.0)
        assert op_to_adjoint_function(s, P2, z) == pytest.approx(-1.0)
        assert op_to_function(s, sx, point([1.0, 1.0])) == pytest.approx(1.0)

    def test_function_is_trace_with_kernel(self, rng):
        s = MappingSpace(3, 0.3)
        A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        A = A + A.conj().T
        z = sample_uniform_constraint(s, rng)
        assert op_to_function(s, A, z) == pytest.approx(np.trace(A @ kernel(s, z)))
        assert op_to_adjoint_function(s, A, z) == pytest.approx(np.trace(inverse_kernel(s, z) @ A))

    def test_dimension_and_hermiticity_errors(self):
        s = MappingSpace(2, 0.0)
        z = point([SQ2, 0])
        with pytest.raises(ValueError):
            op_to_function(s, np.eye(3), z)
        with pytest.raises(ValueError):
            op_to_adjoint_function(s, np.array([[0, 1], [0, 0]]), z)


class TestMoments:
    def test_examples(self):
        s = MappingSpace(2, 0.0)
        assert sphere_moment2(s, 0, 0) == 0.5
        assert sphere_moment4(s, 1, 1, 1, 1) == pytest.approx(0.5)
        assert sphere_moment4(s, 0, 0, 1, 1) == pytest.approx(1 / 6)
        assert sphere_moment2(MappingSpace(2, 0.5), 3, 3) == pytest.approx(1.0)
        assert sphere_moment2(s, 0, 1) == 0.0

    def test_index_range(self):
        with pytest.raises(IndexError):
            sphere_moment2(MappingSpace(2, 0.0), 0, 4)
        with pytest.raises(IndexError):
            sphere_moment4(MappingSpace(2, 0.0), -1, 0, 0, 0)

    @staticmethod
    def _expect_cc(space, idx_conj):
        """E over the sphere of prod_k w_k with w = c_n or conj(c_n), by moment expansion."""
        F = space.num_states
        total = 0j
        # c_n = (X_n + i X_{n+F}) / sqrt 2
        for choice in itertools.product((0, 1), repeat=len(idx_conj)):
            coeff = 1.0 + 0j
            X = []
            for (n, conj), c in zip(idx_conj, choice):
                X.append(n + c * F)
                if c:
                    coeff *= -1j if conj else 1j
            coeff /= math.sqrt(2.0) ** len(idx_conj)
            m = sphere_moment2(space, *X) if len(X) == 2 else sphere_moment4(space, *X)
            total += coeff * m
        return total

    @pytest.mark.parametrize("F", [2, 3])
    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_inverse_kernel_coefficients_reproduce_delta(self, F, gamma):
        """F * E[K_ba Kinv_lk] = delta_bk delta_al, evaluated from the analytic moments."""
        s = MappingSpace(F, gamma)
        for a, b, k, l in itertools.product(range(F), repeat=4):
            # K_ba = c_b conj(c_a) - gamma d_ab ; Kinv_lk = z1 c_l conj(c_k) - z2 d_lk
            e4 = self._expect_cc(s, [(b, False), (a, True), (l, False), (k, True)])
            e_ba = self._expect_cc(s, [(b, False), (a, True)])
            e_lk = self._expect_cc(s, [(l, False), (k, True)])
            val = (
                s.z1 * e4
                - s.z2 * (l == k) * e_ba
                - gamma * (a == b) * s.z1 * e_lk
                + gamma * s.z2 * (a == b) * (l == k)
            )
            expected = float(b == k and a == l)
            assert abs(F * val - expected) < 1e-12, (a, b, k, l)


class TestTraceProductMC:
    def test_identity_exact(self, rng):
        est = trace_product_mc(MappingSpace(2, 0.3), np.eye(2), np.eye(2), 100, rng)
        assert est.value == pytest.approx(2.0, abs=1e-12)
        assert est.stderr < 1e-12

    @pytest.mark.parametrize("gamma", GAMMAS)
    def test_projector_pairs(self, gamma, rng):
        s = MappingSpace(2, gamma)
        P1, P2 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        same = trace_product_mc(s, P1, P1, 40_000, rng)
        cross = trace_product_mc(s, P1, P2, 40_000, rng)
        assert abs(same.value - 1.0) < 3 * same.stderr
        assert abs(cross.value) < 3 * cross.stderr

    def test_random_hermitian_against_direct(self, rng):
        for F in (2, 3):
            s = MappingSpace(F, 0.25)
            A = rng.normal(size=(F, F)) + 1j * rng.normal(size=(F, F))
            B = rng.normal(size=(F, F)) + 1j * rng.normal(size=(F, F))
            A, B = A + A.conj().T, B + B.conj().T
            est = trace_product_mc(s, A, B, 40_000, rng)
            assert abs(est.value - trace_product_direct(A, B)) < 3 * est.stderr

    def test_needs_two_samples(self, rng):
        with pytest.raises(ValueError):
            trace_product_mc(MappingSpace(2, 0.0), np.eye(2), np.eye(2), 1, rng)
