import numpy as np
import pytest

from spectral_cantor.dirac import DiracSpec
from spectral_cantor.gns_cantor import (
    AlgebraElement,
    af_estimate_cn,
    build_triple,
    commutator,
    commutator_norm,
    conditional_expectation,
    constant,
    fwht,
    multiplication_matrix,
    projection_matrix,
    symmetry,
    walsh_function,
)
from spectral_cantor.summability import UhfParams, uhf_cn


def geo(N, g=0.5):
    return build_triple(N, DiracSpec.geometric(g))


def random_element(t, rng, level=None):
    level = t.level if level is None else level
    v = rng.standard_normal(1 << level)
    return AlgebraElement(v).lift(t.level)


def test_fwht_matches_hadamard():
    from scipy.linalg import hadamard

    x = np.arange(16.0)
    np.testing.assert_allclose(fwht(x), hadamard(16) @ x)


class TestBuild:
    def test_level_one(self):
        t = geo(1, 0.3)
        assert sorted(t.dirac_diag) == [0.0, 1.0]

    def test_multiplicities(self):
        t = geo(3, 0.5)
        vals, counts = np.unique(t.dirac_diag, return_counts=True)
        assert dict(zip(vals, counts)) == {0.0: 1, 1.0: 1, 2.0: 2, 4.0: 4}

    def test_memory_cap(self, monkeypatch):
        with pytest.raises(ValueError):
            build_triple(15, DiracSpec.geometric(0.5))
        monkeypatch.setenv("SPECTRAL_CANTOR_MAX_LEVEL", "4")
        with pytest.raises(ValueError):
            geo(5)
        with pytest.raises(ValueError):
            geo(0)

    def test_spec_too_short(self):
        with pytest.raises(ValueError):
            build_triple(3, DiracSpec.custom([1, 2]))


class TestBases:
    def test_walsh_orthonormal(self):
        t = geo(5)
        W = t.walsh_matrix()
        np.testing.assert_allclose(W @ W.T, np.eye(32), atol=1e-12)
        # rows are the normalised Walsh functions in the atom picture
        gram = np.array([[np.mean(walsh_function(S, 5).values * walsh_function(T, 5).values)
                          for T in range(32)] for S in range(32)])
        np.testing.assert_allclose(gram, np.eye(32), atol=1e-12)

    def test_round_trip(self, rng):
        t = geo(6)
        v = rng.standard_normal(64)
        np.testing.assert_allclose(t.from_walsh(t.to_walsh(v)), v, atol=1e-12)

    def test_symmetry_coefficients(self):
        t = geo(4)
        c = t.to_walsh(symmetry(3, 4))
        expected = np.zeros(16)
        expected[0b100] = 1.0
        np.testing.assert_allclose(c, expected, atol=1e-15)

    def test_projection_ranges(self):
        t = geo(4)
        for k in range(5):
            Q = projection_matrix(t, k, "Q")
            for S in range(16):
                e = np.zeros(16)
                e[S] = 1.0
                np.testing.assert_array_equal(Q @ e, e if S.bit_length() == k else 0 * e)
        total = sum(projection_matrix(t, k, "Q", basis="atom") for k in range(5))
        np.testing.assert_allclose(total, np.eye(16), atol=1e-12)
        for k in range(1, 5):
            assert np.trace(projection_matrix(t, k, "Q")) == 2 ** (k - 1)

    def test_dirac_kills_constants(self):
        t = geo(4)
        D = t.dirac_matrix("atom")
        np.testing.assert_allclose(D @ np.ones(16), 0, atol=1e-12)

    def test_projection_is_conditional_expectation(self, rng):
        t = geo(5)
        a = random_element(t, rng)
        W = t.walsh_matrix()
        for k in range(6):
            P = projection_matrix(t, k, "P", basis="atom")
            np.testing.assert_allclose(P @ a.values, conditional_expectation(t, a, k).values, atol=1e-12)
        assert W.shape == (32, 32)


class TestCommutator:
    def test_constant_commutes(self):
        t = geo(4)
        assert np.abs(commutator(t, constant(3.0, 4))).max() == 0
        assert commutator_norm(t, constant(3.0, 4)) == 0.0

    @pytest.mark.parametrize("g", [0.3, 0.5, 0.7, 0.9])
    def test_symmetry_norms(self, g):
        t = geo(7, g)
        for n in range(1, 8):
            assert commutator_norm(t, symmetry(n, 7)) == pytest.approx(g ** (1 - n), rel=1e-12)
            assert commutator_norm(t, symmetry(n, 7) * g ** (n - 1)) == pytest.approx(1.0, rel=1e-12)

    def test_two_bases_agree(self, rng):
        t = geo(4, 0.3)
        a = random_element(t, rng)
        D = t.dirac_matrix("atom")
        direct = D @ np.diag(a.values) - np.diag(a.values) @ D
        np.testing.assert_allclose(commutator(t, a, basis="atom"), direct, atol=1e-10)

    def test_i_commutator_self_adjoint(self, rng):
        t = geo(4)
        C = commutator(t, random_element(t, rng))
        np.testing.assert_allclose(1j * C, (1j * C).conj().T, atol=1e-12)

    def test_s1_plus_s2_block_structure(self):
        # [D, a] has no diagonal blocks, so it is the sum over n of the pieces
        # P_{n-1} C Q_n + Q_n C P_{n-1}; each piece is an off-diagonal block whose
        # norm is the larger of the norms of its two summands
        t = geo(2, 0.5)
        a = symmetry(1, 2) + symmetry(2, 2)
        C = commutator(t, a)
        assembled = np.zeros_like(C)
        for n in (1, 2):
            P = projection_matrix(t, n - 1, "P")
            Q = projection_matrix(t, n, "Q")
            upper, lower = P @ C @ Q, Q @ C @ P
            assembled += upper + lower
            assert np.linalg.norm(upper + lower, 2) == pytest.approx(
                max(np.linalg.norm(upper, 2), np.linalg.norm(lower, 2)), rel=1e-12)
        dense = np.linalg.norm(C, 2)
        assert np.linalg.norm(assembled, 2) == pytest.approx(dense, abs=1e-10)
        assert commutator_norm(t, a) == pytest.approx(dense, abs=1e-10)
        # path graph with edge weights 1, 2, 1: lambda^4 - 6 lambda^2 + 4 = 0
        assert dense == pytest.approx(np.sqrt(3 + np.sqrt(5)), rel=1e-12)

    def test_lanczos_path_matches_dense(self, rng):
        import spectral_cantor.gns_cantor as gc

        t = geo(7, 0.7)
        a = random_element(t, rng)
        dense = commutator_norm(t, a)
        old = gc.DENSE_LIMIT
        try:
            gc.DENSE_LIMIT = 16
            sparse = commutator_norm(t, a)
        finally:
            gc.DENSE_LIMIT = old
        assert sparse == pytest.approx(dense, rel=1e-9)

    def test_level_restriction(self, rng):
        t = geo(6)
        a = random_element(t, rng, level=3)
        assert a.level == 3
        full = np.linalg.norm(commutator(t, a), 2)
        assert commutator_norm(t, a) == pytest.approx(full, rel=1e-10)
        # a commutes with Q_k for k beyond its level
        M = multiplication_matrix(t, a)
        for k in range(4, 7):
            Q = projection_matrix(t, k, "Q")
            np.testing.assert_allclose(Q @ M - M @ Q, 0, atol=1e-12)


class TestConditionalExpectation:
    def test_examples(self):
        t = geo(4)
        np.testing.assert_allclose(conditional_expectation(t, symmetry(1, 4), 0).values, 0)
        np.testing.assert_allclose(conditional_expectation(t, symmetry(1, 4), 1).values, symmetry(1, 4).values)
        s3 = symmetry(3, 4)
        np.testing.assert_allclose(conditional_expectation(t, s3, 2).values, 0)
        diff = conditional_expectation(t, s3, 3) - conditional_expectation(t, s3, 2)
        np.testing.assert_allclose(diff.values, s3.values)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            conditional_expectation(geo(3), symmetry(1, 3), 4)

    def test_steps_bounded_by_beta(self, rng):
        g = 0.6
        t = geo(6, g)
        for _ in range(20):
            a = random_element(t, rng)
            a = a / commutator_norm(t, a)
            for k in range(1, 7):
                step = conditional_expectation(t, a, k) - conditional_expectation(t, a, k - 1)
                assert step.sup_norm() <= g ** (k - 1) / (1 - g) + 1e-9

    def test_block_identity(self, rng):
        t = geo(4)
        a = random_element(t, rng)
        for n in range(1, 5):
            step = conditional_expectation(t, a, n) - conditional_expectation(t, a, n - 1)
            M = multiplication_matrix(t, step)
            Pn, Pm, Qn = (projection_matrix(t, n, "P"), projection_matrix(t, n - 1, "P"),
                          projection_matrix(t, n, "Q"))
            np.testing.assert_allclose(Pn @ M @ Pn, Pm @ M @ Qn + Qn @ M @ Pm, atol=1e-12)
            np.testing.assert_allclose(Qn @ M @ Qn, 0, atol=1e-12)


class TestCn:
    @pytest.mark.parametrize("k,expected", [(1, 1.0), (2, np.sqrt(2)), (3, 2.0), (6, 2**2.5)])
    def test_values(self, k, expected):
        assert af_estimate_cn(geo(6), k) == pytest.approx(expected, rel=1e-12)

    def test_brute_force_sample_never_exceeds(self, rng):
        t = geo(5)
        k = 3
        best = af_estimate_cn(t, k)
        x = np.arange(1 << k)
        s_k = 2.0 * ((x >> (k - 1)) & 1) - 1
        for _ in range(500):
            gvals = rng.standard_normal(1 << (k - 1))
            b = gvals[x & ((1 << (k - 1)) - 1)] * s_k
            assert np.abs(b).max() / np.sqrt(np.mean(b * b)) <= best + 1e-12

    def test_uhf_comparison(self):
        value, witness = uhf_cn(UhfParams.car(3), 3)
        assert value == pytest.approx(2**1.5)
        assert np.trace(witness.T @ witness) / 8 == pytest.approx(1.0)
