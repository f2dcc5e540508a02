from fractions import Fraction

import numpy as np
import pytest

from maxent_moments.moments import FiniteDistribution, SupportWindow, moments_of, validate_moments
from maxent_moments.numerics import InsufficientRealRoots, determinant
from maxent_moments.oracle import ReferenceLaw, reference_moments
from maxent_moments.support import (
    DegeneratePolynomial,
    SupportConfig,
    chebyshev_radius,
    chebyshev_window,
    delta0_polynomial,
    delta1_polynomial,
    delta_roots,
    extend_block,
    extend_one,
    initial_window,
    tail_ok,
)


def exact_moments(points, weights, order):
    """Moments of a finite law in exact rational arithmetic, then rounded once."""
    ws = [Fraction(w) for w in weights]
    total = sum(ws)
    return validate_moments(
        [float(sum(w * Fraction(x) ** k for x, w in zip(points, ws)) / total) for k in range(order + 1)]
    )


def dist(window, probs):
    return FiniteDistribution(SupportWindow(*window), np.array(probs, dtype=float))


class TestDelta0:
    def test_linear_root_at_mean(self):
        p = delta0_polynomial(validate_moments([1, 3.5, 20]))
        assert p.degree == 1
        np.testing.assert_allclose(p.coeffs, [-3.5, 1.0])

    def test_two_point(self):
        p = delta0_polynomial(validate_moments([1, 1, 2, 4, 8]))
        # proportional to w^2 - 2 w
        np.testing.assert_allclose(p.coeffs / p.coeffs[-1], [0.0, -2.0, 1.0], atol=1e-14)
        w, eta = delta_roots(validate_moments([1, 1, 2, 4, 8]))
        np.testing.assert_allclose(w, [0.0, 2.0], atol=1e-9)
        assert eta.size == 0

    def test_point_mass_degenerate(self):
        with pytest.raises(DegeneratePolynomial):
            delta0_polynomial(validate_moments([1, 3, 9, 27, 81]))

    def test_needs_second_moment(self):
        with pytest.raises(ValueError):
            delta0_polynomial(validate_moments([1, 2]))

    @pytest.mark.parametrize(
        "law", [("binomial", (20, 0.3)), ("binomial", (10, 0.7)), ("poisson", (5.0,)), ("poisson", (2.5,))]
    )
    @pytest.mark.parametrize("M", [2, 3, 4, 5])
    def test_matches_numeric_determinant(self, law, M):
        mu = reference_moments(ReferenceLaw(*law), SupportWindow(0, 40), M)
        p = delta0_polynomial(mu)
        k = M // 2
        rows = np.array([[mu[r + j] for j in range(k + 1)] for r in range(k)])
        for w in np.linspace(-5, 25, 13):
            direct = determinant(np.vstack([rows, w ** np.arange(k + 1)]))
            scale = np.prod(np.linalg.norm(rows, axis=1)) * np.linalg.norm(w ** np.arange(k + 1))
            assert abs(p(w) - direct) <= 1e-9 * max(abs(direct), scale * 1e-3)

    @pytest.mark.parametrize(
        "points,weights",
        [([4], [1]), ([0], [1]), ([7], [1]), ([1, 5], [1, 3]), ([0, 9], [2, 1]), ([2, 3], [1, 1])],
    )
    def test_exact_support_recovery(self, points, weights):
        k = len(points)
        mu = exact_moments(points, weights, 2 * k)
        w, _ = delta_roots(mu)
        np.testing.assert_allclose(w, points, atol=1e-8)


class TestDelta1:
    def test_example(self):
        p = delta1_polynomial(validate_moments([1, 1, 2, 4]), 0.0)
        np.testing.assert_allclose(p.coeffs, [-2.0, 1.0])

    def test_general_shift(self):
        mu = validate_moments([1, 2, 6, 20])
        w1 = 0.5
        p = delta1_polynomial(mu, w1)
        root = -p.coeffs[0] / p.coeffs[1]
        assert root == pytest.approx((mu[2] - w1 * mu[1]) / (mu[1] - w1 * mu[0]))

    def test_shift_at_mean_degenerates(self):
        # mu_1 - w1 mu_0 = 0 leaves a constant in eta
        mu = validate_moments([1, 2, 6, 20])
        with pytest.raises(InsufficientRealRoots):
            delta_roots(mu)  # w1 is the mean for M = 3

    def test_zero_shifted_moments(self):
        with pytest.raises(DegeneratePolynomial):
            delta1_polynomial(validate_moments([1, 3, 9, 27]), 3.0)

    def test_needs_odd_order(self):
        with pytest.raises(ValueError):
            delta1_polynomial(validate_moments([1, 1, 2, 4, 8]), 0.0)


class TestInitialWindow:
    def test_two_point(self):
        assert initial_window(validate_moments([1, 1, 2, 4, 8])) == SupportWindow(0, 2)

    def test_single_root(self):
        assert initial_window(validate_moments([1, 5, 26])) == SupportWindow(5, 5)

    def test_fractional_mean(self):
        assert initial_window(validate_moments([1, 2.5, 7])) == SupportWindow(2, 3)

    def test_order_one(self):
        assert initial_window(validate_moments([1, 1])) == SupportWindow(1, 1)
        assert initial_window(validate_moments([1, 0.4])) == SupportWindow(0, 1)

    def test_complex_roots_fall_back(self):
        # not realizable; the cubic has a complex pair
        mu = validate_moments([1, 3, 9, 28, 31, 45, 57])
        with pytest.raises(InsufficientRealRoots):
            delta_roots(mu)
        cfg = SupportConfig()
        assert initial_window(mu, cfg) == chebyshev_window(mu, cfg)

    def test_degenerate_falls_back(self):
        mu = validate_moments([1, 3, 9, 27, 81])
        assert initial_window(mu) == SupportWindow(0, 93)

    def test_odd_order_uses_both_polynomials(self):
        mu = reference_moments(ReferenceLaw("poisson", (5.0,)), SupportWindow(0, 60), 5)
        w, eta = delta_roots(mu)
        assert w.size == 2 and eta.size == 1
        D = initial_window(mu)
        assert D.left == int(np.floor(min(w[0], eta[0])))
        assert D.right == int(np.ceil(max(w[-1], eta[-1])))

    def test_odd_order_two_point_is_degenerate(self):
        # shifting by the lower support point leaves a point mass
        mu = exact_moments([1, 4], [1, 1], 5)
        with pytest.raises(DegeneratePolynomial):
            delta_roots(mu)
        D = initial_window(mu)
        assert D == chebyshev_window(mu, SupportConfig())

    @pytest.mark.parametrize(
        "law", [("poisson", (5.0,)), ("poisson", (0.3,)), ("binomial", (20, 0.3)),
                ("geometric", (0.3,)), ("uniform", (4, 12)), ("two_point", (2, 9, 0.3))]
    )
    @pytest.mark.parametrize("M", [1, 2, 3, 4, 5])
    def test_contains_mean_neighbour(self, law, M):
        mu = reference_moments(ReferenceLaw(*law), SupportWindow(0, 60), M)
        D = initial_window(mu)
        assert 0 <= D.left <= D.right
        assert np.floor(mu[1]) in D or np.ceil(mu[1]) in D


class TestTailOk:
    def test_heavy_edge(self):
        assert not tail_ok(dist((0, 2), [0.5, 0.499, 0.001]), SupportConfig(delta_prob=1e-3))

    def test_zero_edge(self):
        assert tail_ok(dist((0, 2), [0.5, 0.5, 0.0]))

    def test_geometric_shape(self):
        D = SupportWindow(0, 40)
        q = FiniteDistribution.from_weights(D, 2.0 ** -D.states())
        assert tail_ok(q, SupportConfig(delta_prob=1e-3))

    def test_both_ends(self):
        q = dist((3, 5), [0.3, 0.7, 0.0])
        assert tail_ok(q)
        assert not tail_ok(q, SupportConfig(both_ends=True))

    def test_both_ends_ignores_left_at_zero(self):
        q = dist((0, 2), [0.3, 0.7, 0.0])
        assert tail_ok(q, SupportConfig(both_ends=True))


class TestExtend:
    def test_even_step_moves_left(self):
        assert extend_one(SupportWindow(3, 7), 0) == SupportWindow(2, 7)

    def test_even_step_clamped(self):
        assert extend_one(SupportWindow(0, 7), 2) == SupportWindow(0, 7)

    def test_odd_step_moves_right(self):
        assert extend_one(SupportWindow(3, 7), 1) == SupportWindow(3, 8)

    def test_literal_even_step_is_identity(self):
        assert extend_one(SupportWindow(3, 7), 0, literal=True) == SupportWindow(3, 7)

    def test_grows_by_one_unless_clamped(self):
        D = SupportWindow(5, 9)
        for step in range(20):
            nxt = extend_one(D, step)
            assert nxt.size == D.size + 1 or (D.left == 0 and step % 2 == 0 and nxt == D)
            D = nxt

    def test_two_steps_grow_both_ends(self):
        D = SupportWindow(4, 6)
        for step in (0, 2, 4):
            two = extend_one(extend_one(D, step), step + 1)
            assert two.left == D.left - 1 and two.right == D.right + 1
            D = two

    def test_block(self):
        assert extend_block(SupportWindow(5, 10), 4) == SupportWindow(3, 12)

    def test_block_clamped(self):
        assert extend_block(SupportWindow(1, 10), 6) == SupportWindow(0, 13)

    def test_block_zero(self):
        assert extend_block(SupportWindow(1, 10), 0) == SupportWindow(1, 10)

    def test_block_negative(self):
        with pytest.raises(ValueError):
            extend_block(SupportWindow(1, 10), -1)


class TestChebyshev:
    def test_printed_example(self):
        mu = validate_moments([1, 3, 10])
        assert chebyshev_radius(mu, SupportConfig()) == pytest.approx(100)
        assert chebyshev_window(mu, SupportConfig()) == SupportWindow(0, 103)

    def test_origin(self):
        assert chebyshev_window(validate_moments([1, 0, 0]), SupportConfig()) == SupportWindow(0, 0)

    def test_standard_variant(self):
        mu = validate_moments([1, 3, 10])  # variance 1
        cfg = SupportConfig(chebyshev_variant="standard")
        assert chebyshev_radius(mu, cfg) == pytest.approx(np.sqrt(10))
        assert chebyshev_window(mu, cfg) == SupportWindow(0, 7)

    def test_capped(self):
        cfg = SupportConfig(max_window=11)
        D = chebyshev_window(validate_moments([1, 50, 2600]), cfg)
        assert D.size == 11 and 50 in D

    def test_default_xi(self):
        assert SupportConfig().xi == 0.1

    @pytest.mark.parametrize("variant", ["printed", "standard"])
    @pytest.mark.parametrize(
        "law", [("poisson", (1.0,)), ("poisson", (5.0,)), ("poisson", (30.0,)),
                ("binomial", (20, 0.3)), ("binomial", (50, 0.9))]
    )
    def test_coverage(self, law, variant):
        ref = ReferenceLaw(*law)
        full = SupportWindow(0, 200)
        mu = reference_moments(ref, full, 2)
        D = chebyshev_window(mu, SupportConfig(chebyshev_variant=variant))
        assert ref.pmf(D.states()).sum() >= 0.9


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(delta_prob=0), dict(delta_prob=1), dict(xi=0), dict(xi=1.5),
         dict(strategy="bogus"), dict(max_window=0), dict(chebyshev_variant="x")],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SupportConfig(**kwargs)
