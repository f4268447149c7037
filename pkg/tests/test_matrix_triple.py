import json

import numpy as np
import pytest

from spectral_cantor.matrix_triple import (
    MatrixState,
    flip_commutator_norm,
    flip_operator,
    gell_mann_basis,
    gns_vector,
    left_multiplication,
    maximize_spread_ball,
    norm_witness,
    projection_commutator_norm,
    random_matrix_state,
    random_self_adjoint,
    spread_half,
    state_norm_distance,
    verify_unithm,
)


class TestSpread:
    def test_examples(self):
        assert spread_half(np.eye(3)) == 0.0
        assert spread_half(np.diag([3.0, 1.0, -1.0])) == pytest.approx(2.0)
        assert spread_half(np.diag([1.0, -1.0])) == pytest.approx(1.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            spread_half(np.array([[0, 1], [0, 0]]))
        with pytest.raises(ValueError):
            spread_half(np.zeros((2, 3)))

    def test_is_distance_to_scalars(self, rng):
        a = random_self_adjoint(5, rng)
        ts = np.linspace(-5, 5, 2001)
        best = min(np.linalg.norm(a - t * np.eye(5), 2) for t in ts)
        assert spread_half(a) <= best + 1e-12
        assert best - spread_half(a) < 1e-2


class TestFlip:
    def test_involution(self):
        for n in (1, 2, 5):
            S = flip_operator(n)
            np.testing.assert_array_equal(S @ S, np.eye(n * n))

    def test_transposition(self, rng):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        np.testing.assert_array_equal(flip_operator(4) @ gns_vector(a), gns_vector(a.T))

    def test_left_multiplication(self, rng):
        a, b = rng.standard_normal((2, 3, 3))
        np.testing.assert_allclose(left_multiplication(a) @ gns_vector(b), gns_vector(a @ b), atol=1e-12)

    def test_trace_state_inner_product(self, rng):
        a, b = rng.standard_normal((2, 4, 4))
        lhs = gns_vector(a, normalise=True) @ gns_vector(b, normalise=True)
        assert lhs == pytest.approx(np.trace(b.T @ a) / 4)

    def test_examples(self):
        assert flip_commutator_norm(np.diag([1.0, -1.0])) == pytest.approx(1.0)
        assert flip_commutator_norm(np.eye(3)) == pytest.approx(0.0, abs=1e-15)
        assert projection_commutator_norm(np.diag([1.0, -1.0])) == pytest.approx(1.0)

    def test_random_n6(self, rng):
        a = random_self_adjoint(6, rng)
        assert flip_commutator_norm(a) == pytest.approx(spread_half(a), abs=1e-10)
        assert projection_commutator_norm(a) == pytest.approx(spread_half(a), abs=1e-10)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_identity_of_seminorms(self, n, rng):
        for _ in range(50):
            a = random_self_adjoint(n, rng)
            assert abs(flip_commutator_norm(a) - spread_half(a)) <= 1e-9

    def test_translation_invariance(self, rng):
        a = random_self_adjoint(4, rng)
        for alpha in rng.standard_normal(5) * 10:
            assert flip_commutator_norm(a + alpha * np.eye(4)) == pytest.approx(flip_commutator_norm(a), abs=1e-10)

    def test_size_cap(self):
        with pytest.raises(MemoryError):
            flip_commutator_norm(np.eye(41))


class TestStates:
    def test_validation(self):
        with pytest.raises(ValueError):
            MatrixState(np.eye(2))
        with pytest.raises(ValueError):
            MatrixState(np.diag([1.5, -0.5]))
        with pytest.raises(ValueError):
            MatrixState(np.array([[0.5, 0.5], [0.0, 0.5]]))
        s = MatrixState.pure([1, 1j])
        assert s(np.eye(2)) == pytest.approx(1.0)

    def test_distance_examples(self, rng):
        phi = random_matrix_state(3, rng)
        assert state_norm_distance(phi, phi) == 0.0
        up, down = MatrixState.pure([1, 0]), MatrixState.pure([0, 1])
        assert state_norm_distance(up, down) == pytest.approx(2.0)
        plus = MatrixState.pure([1, 1])
        minus = MatrixState.pure([1, -1])
        assert state_norm_distance(plus, minus) == pytest.approx(2.0)

    def test_witness(self, rng):
        phi, psi = random_matrix_state(4, rng), random_matrix_state(4, rng, rank=2)
        a = norm_witness(phi, psi)
        assert spread_half(a) <= 1 + 1e-12
        val = np.trace((phi.density - psi.density) @ a).real
        assert val == pytest.approx(state_norm_distance(phi, psi), rel=1e-12)

    def test_solver_cross_check(self, rng):
        phi, psi = random_matrix_state(4, rng), random_matrix_state(4, rng)
        lower, upper, a = maximize_spread_ball(phi, psi)
        d = state_norm_distance(phi, psi)
        assert lower <= d + 1e-9 <= upper + 2e-9
        assert abs(lower - d) <= 1e-6
        # the dual bracket is a certificate only; the degenerate top cluster keeps it loose
        assert upper - d <= 1e-4
        assert flip_commutator_norm(a) <= 1 + 1e-9

    def test_gell_mann(self):
        G = gell_mann_basis(3)
        assert G.shape == (8, 3, 3)
        gram = np.einsum("kij,lji->kl", G, G).real
        np.testing.assert_allclose(gram, 2 * np.eye(8), atol=1e-12)
        np.testing.assert_allclose(np.einsum("kii->k", G), 0, atol=1e-12)


class TestVerify:
    def test_n2(self):
        r = verify_unithm(2, trials=100)
        assert r.max_deviation < 1e-8 and r.passed

    def test_n8(self):
        r = verify_unithm(8, trials=20)
        assert r.max_deviation < 1e-7 and r.passed

    def test_identical(self):
        r = verify_unithm(3, trials=5, identical=True)
        assert r.max_deviation == 0.0

    def test_deterministic_and_serialisable(self):
        a = verify_unithm(3, trials=4, seed=7).as_dict()
        b = verify_unithm(3, trials=4, seed=7).as_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_range(self):
        with pytest.raises(ValueError):
            verify_unithm(11)
