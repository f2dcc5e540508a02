import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxent_moments.numerics import (
    InsufficientRealRoots,
    PolyCoeffs,
    SingularSystemError,
    determinant,
    log_sum_exp,
    real_simple_roots,
    solve_damped,
)


def cofactor_det(A):
    """Laplace expansion along the first row; exponential but exact in structure."""
    n = len(A)
    if n == 1:
        return A[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in A[1:]]
        total += (-1) ** j * A[0][j] * cofactor_det(minor)
    return total


class TestLogSumExp:
    def test_equal_terms(self):
        assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2), abs=1e-15)

    def test_no_overflow(self):
        assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000 + math.log(2), rel=1e-15)

    def test_tiny_correction(self):
        mpmath.mp.dps = 40
        expected = float(mpmath.log(1 + mpmath.exp(-50)))
        assert log_sum_exp([0.0, -50.0]) == pytest.approx(expected, rel=1e-14)

    def test_singleton_exact(self):
        assert log_sum_exp([3.25]) == 3.25

    def test_all_minus_infinity(self):
        assert log_sum_exp([-np.inf, -np.inf]) == -np.inf

    def test_empty(self):
        with pytest.raises(ValueError):
            log_sum_exp([])

    @given(
        st.lists(st.floats(-700, 700), min_size=1, max_size=20),
        st.floats(-1e3, 1e3),
    )
    def test_shift_invariance(self, terms, c):
        lhs = log_sum_exp(np.array(terms) + c)
        rhs = log_sum_exp(terms) + c
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


class TestSolveDamped:
    def test_identity(self):
        np.testing.assert_allclose(solve_damped(np.eye(2), 0.0, [1.0, 2.0]), [1, 2])

    def test_uniform_damping_halves_step(self):
        np.testing.assert_allclose(solve_damped(np.eye(2), 1.0, [2.0, 4.0]), [1, 2])

    def test_random_spd_residual(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 7))
            B = rng.standard_normal((n, n))
            H = B @ B.T + 0.1 * np.eye(n)
            g = rng.standard_normal(n)
            gamma = float(rng.choice([0.0, 1e-3, 1.0, 10.0]))
            s = solve_damped(H, gamma, g)
            A = H + gamma * np.diag(np.diag(H))
            assert np.linalg.norm(A @ s - g) <= 1e-10 * np.linalg.norm(g)

    def test_zero_diagonal_is_singular(self):
        with pytest.raises(SingularSystemError):
            solve_damped(np.zeros((2, 2)), 1.0, [1.0, 1.0])

    def test_rank_deficient_without_damping(self):
        H = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularSystemError):
            solve_damped(H, 0.0, [1.0, 0.0])
        # damping makes it solvable
        s = solve_damped(H, 1.0, [1.0, 0.0])
        np.testing.assert_allclose((H + np.diag(np.diag(H))) @ s, [1.0, 0.0], atol=1e-14)


class TestDeterminant:
    def test_identity(self):
        assert determinant(np.eye(3)) == 1.0

    def test_two_by_two(self):
        assert determinant([[1, 2], [3, 4]]) == pytest.approx(-2.0, abs=1e-15)

    def test_one_by_one_exact(self):
        assert determinant([[5.0]]) == 5.0

    def test_against_cofactor_expansion(self, rng):
        for n in range(1, 6):
            for _ in range(20):
                A = rng.standard_normal((n, n))
                expected = cofactor_det(A.tolist())
                assert abs(determinant(A) - expected) <= 1e-12 * max(1.0, abs(expected))

    def test_singular(self):
        assert determinant([[1, 2], [2, 4]]) == 0.0

    def test_non_square(self):
        with pytest.raises(ValueError):
            determinant(np.ones((2, 3)))


class TestRealRoots:
    def test_quadratic(self):
        p = PolyCoeffs([0, -2, 1])
        roots, simple = real_simple_roots(p)
        np.testing.assert_allclose(roots, [0, 2], atol=1e-14)
        assert simple.all()
        assert np.all(np.abs(p(roots)) <= 1e-12)

    def test_linear(self):
        roots, _ = real_simple_roots(PolyCoeffs([-3, 1]))
        assert roots.tolist() == [3.0]

    def test_no_real_roots(self):
        with pytest.raises(InsufficientRealRoots):
            real_simple_roots(PolyCoeffs([1, 0, 1]))

    def test_double_root_flagged(self):
        roots, simple = real_simple_roots(PolyCoeffs([4, -4, 1]))  # (w-2)^2
        np.testing.assert_allclose(roots, [2, 2], atol=1e-6)
        assert not simple.any()

    def test_trailing_zero_trimmed(self):
        assert PolyCoeffs([1, 2, 0, 0]).degree == 1

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            real_simple_roots(PolyCoeffs([3.0]))

    def test_residual_property(self, rng):
        tol = 1e-8
        for _ in range(100):
            k = int(rng.integers(1, 5))
            true_roots = np.sort(rng.uniform(-10, 40, k))
            coeffs = np.polynomial.polynomial.polyfromroots(true_roots) * rng.uniform(0.1, 10)
            p = PolyCoeffs(coeffs)
            try:
                roots, simple = real_simple_roots(p, tol)
            except InsufficientRealRoots:
                continue  # clustered roots can split into a complex pair
            for r in roots:
                assert abs(p(r)) <= tol * p.scale_at(r)
