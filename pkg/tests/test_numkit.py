from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from geotherm import numkit
from geotherm.errors import DomainError, NotPositiveDefinite, NotSymmetric


class TestReverseCholesky:
    def test_two_by_two_example(self):
        u = numkit.reverse_cholesky([[5.0, 2.0], [2.0, 1.0]])
        np.testing.assert_allclose(u, [[1.0, 2.0], [0.0, 1.0]], atol=1e-14)

    def test_factor_is_upper_triangular_with_positive_diagonal(self, rng):
        a = rng.normal(size=(5, 5))
        m = a @ a.T + 5 * np.eye(5)
        u = numkit.reverse_cholesky(m)
        assert np.allclose(np.tril(u, -1), 0.0)
        assert np.all(np.diag(u) > 0)
        np.testing.assert_allclose(u @ u.T, m, rtol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotSymmetric):
            numkit.reverse_cholesky([[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            numkit.reverse_cholesky([[1.0, 2.0], [2.0, 1.0]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10_000))
    def test_round_trip(self, n, seed):
        a = np.random.default_rng(seed).normal(size=(n, n))
        m = a @ a.T + n * np.eye(n)
        u = numkit.reverse_cholesky(m)
        assert np.max(np.abs(u @ u.T - m)) <= 1e-10 * np.max(np.abs(m))


class TestBesselK0:
    @pytest.mark.parametrize("x, expected", [(1.0, 0.4210244382), (0.1, 2.4270690247)])
    def test_tabulated_values(self, x, expected):
        assert numkit.bessel_k0(x) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("x", [0.05, 0.3, 1.0, 4.0, 12.0])
    def test_matches_integral_representation(self, x):
        # K0(x) = int_0^inf exp(-x cosh t) dt
        upper = math.acosh(800.0 / x)  # integrand below exp(-800) beyond this
        ref, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)), 0, upper, epsabs=1e-15, limit=200)
        assert numkit.bessel_k0(x) == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("x", [20.0, 40.0, 80.0])
    def test_large_argument_asymptotics(self, x):
        series = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 - 1 / (8 * x) + 9 / (128 * x * x))
        assert numkit.bessel_k0(x) == pytest.approx(series, rel=1e-4)

    @pytest.mark.parametrize("x", [0.5, 2.0, 7.0])
    def test_modified_bessel_equation(self, x):
        f = lambda t: numkit.bessel_k0(t)
        h = 1e-3
        d1 = (f(x + h) - f(x - h)) / (2 * h)
        d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
        residual = x * x * d2 + x * d1 - x * x * f(x)
        assert abs(residual) < 1e-6

    def test_log_form_does_not_underflow(self):
        assert numkit.log_bessel_k0(2000.0) == pytest.approx(math.log(special.k0e(2000.0)) - 2000.0, rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_non_positive_argument_rejected(self, x):
        with pytest.raises(DomainError):
            numkit.bessel_k0(x)


class TestQuadrature:
    def test_gaussian_over_real_line(self):
        res = numkit.integrate_adaptive(lambda x: math.exp(-x * x), -np.inf, np.inf)
        assert res.value == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert res.error_estimate < 1e-8

    def test_half_line_gaussian_moment(self):
        res = numkit.integrate_adaptive(lambda x: x * x * math.exp(-x * x), 0.0, np.inf)
        assert res.value == pytest.approx(math.sqrt(math.pi) / 4, rel=1e-12)

    def test_two_dimensional_gaussian(self):
        res = numkit.integrate_adaptive_2d(
            lambda x, y: math.exp(-x * x - 2 * y * y), (-np.inf, np.inf), (-np.inf, np.inf)
        )
        assert res.value == pytest.approx(math.pi / math.sqrt(2), rel=1e-9)


class TestFiniteDifferences:
    def test_second_derivative_of_cube(self):
        hess = numkit.fd_hessian(lambda p: p[0] ** 3, np.array([1.0]))
        assert hess[0, 0] == pytest.approx(6.0, rel=1e-6)

    def test_gradient_and_jacobian(self):
        f = lambda p: np.sin(p[0]) * p[1] ** 2
        p = np.array([0.4, 1.3])
        g = numkit.fd_gradient(f, p)
        np.testing.assert_allclose(g, [np.cos(0.4) * 1.69, 2 * 1.3 * np.sin(0.4)], rtol=1e-8)
        J = numkit.fd_jacobian(lambda q: np.array([q[0] * q[1], q[0] + q[1] ** 2]), p)
        np.testing.assert_allclose(J, [[1.3, 0.4], [1.0, 2.6]], rtol=1e-8)

    def test_exterior_derivative_of_exact_form_vanishes(self):
        # d(d phi) = 0 for phi = x y^2 + sin z
        one_form = lambda p: np.array([p[1] ** 2, 2 * p[0] * p[1], np.cos(p[2])])
        d = numkit.fd_exterior_derivative(one_form, np.array([0.3, -0.7, 1.1]))
        assert np.max(np.abs(d)) < 1e-7

    def test_exterior_derivative_of_area_primitive(self):
        # d(-y dx + x dy) = 2 dx^dy
        d = numkit.fd_exterior_derivative(lambda p: np.array([-p[1], p[0]]), np.array([0.2, 0.5]))
        np.testing.assert_allclose(d, [[0.0, 2.0], [-2.0, 0.0]], atol=1e-8)


class TestPfaffian:
    def test_standard_symplectic_block(self):
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert numkit.pfaffian(J) == 1.0
        assert numkit.pfaffian(np.kron(np.eye(2), J)) == 1.0

    def test_square_equals_determinant(self, rng):
        a = rng.normal(size=(6, 6))
        a = a - a.T
        assert numkit.pfaffian(a) ** 2 == pytest.approx(np.linalg.det(a), rel=1e-10)

    def test_odd_dimension_is_zero(self):
        assert numkit.pfaffian(np.zeros((3, 3))) == 0.0


def test_seeded_rng_is_reproducible():
    a = numkit.make_rng(7).normal(size=10)
    b = numkit.make_rng(7).normal(size=10)
    assert np.array_equal(a, b)


def test_max_abs():
    assert numkit.max_abs([1.0, -3.0, 2.0]) == 3.0
