import math
import unittest

import numpy as np

from src.models import AlphaVector, EpsVector, MultiIndex, ParameterDomainError, PreconditionError
from src.operators import (
    EigenvalueTable, GridFunction, SpectralFunction, delta_apply, delta_star_apply, dunkl_derivative,
    eigenvalue, factorized_oscillator, heat_apply, heat_apply_grid, oscillator_apply, parity_part,
    poisson_apply, spectral_projection, subordinate,
)


class TestEigenvalues(unittest.TestCase):
    def test_formula(self):
        alpha = AlphaVector.of(0.5, 1.0)
        self.assertEqual(eigenvalue(3, alpha), 2 * 3 + 2 * 1.5 + 2 * 2)
        np.testing.assert_allclose(EigenvalueTable(alpha, 2).values, [7.0, 9.0, 11.0])
        with self.assertRaises(ParameterDomainError):
            eigenvalue(-1, alpha)


class TestSpectralFunction(unittest.TestCase):
    def setUp(self):
        self.alpha = AlphaVector.of(0.0, 1.3)
        self.f = SpectralFunction(self.alpha, {(0, 0): 1.0, (1, 2): -2.0, (3, 0): 0.5})

    def test_rejects_bad_index(self):
        with self.assertRaises(ParameterDomainError):
            SpectralFunction(self.alpha, {(1,): 1.0})
        with self.assertRaises(ParameterDomainError):
            SpectralFunction(self.alpha, {(1, -1): 1.0})

    def test_merges_and_drops_zeros(self):
        f = SpectralFunction(self.alpha, {(1, 0): 1.0, MultiIndex.of(1, 0): 2.0, (0, 1): 0.0})
        self.assertEqual(f.coeffs, {(1, 0): 3.0})

    def test_norms(self):
        self.assertAlmostEqual(self.f.norm(), math.sqrt(1 + 4 + 0.25))
        # (0,0) in N_00; (1,2) and (3,0) in N_10
        self.assertAlmostEqual(self.f.restricted_norm(EpsVector.parse('00')), 0.5)
        self.assertAlmostEqual(self.f.restricted_norm(EpsVector.parse('10')), math.sqrt(4.25 / 4))
        self.assertEqual(self.f.restricted_norm(EpsVector.parse('11')), 0.0)

    def test_arithmetic(self):
        g = self.f - self.f.scale(0.5)
        self.assertAlmostEqual(g.coefficient((1, 2)), -1.0)
        self.assertEqual((2 * self.f).coefficient((3, 0)), 1.0)
        self.assertAlmostEqual(self.f.inner(self.f), self.f.norm() ** 2)

    def test_json(self):
        restored = SpectralFunction.from_json(self.f.to_json())
        self.assertEqual(restored.coeffs, self.f.coeffs)
        self.assertEqual(restored.alpha, self.alpha)

    def test_random_is_seeded_and_in_parity(self):
        eps = EpsVector.parse('01')
        a = SpectralFunction.random(self.alpha, 5, 8, seed=7, eps=eps)
        b = SpectralFunction.random(self.alpha, 5, 8, seed=7, eps=eps)
        self.assertEqual(a.coeffs, b.coeffs)
        self.assertEqual(len(a.coeffs), 5)
        self.assertTrue(all(MultiIndex(m).in_parity(eps) for m in a.coeffs))

    def test_evaluation_is_orthonormal_expansion(self):
        x = np.array([[0.3, -1.0], [1.5, 0.2]])
        self.assertEqual(self.f(x).shape, (2,))
        self.assertEqual(SpectralFunction(self.alpha)(x).tolist(), [0.0, 0.0])


class TestLadder(unittest.TestCase):
    def setUp(self):
        self.alpha = AlphaVector.of(0.5, 2.0)
        self.f = SpectralFunction.random(self.alpha, 6, 6, seed=1)
        self.g = SpectralFunction.random(self.alpha, 6, 6, seed=2)

    def test_delta_star_is_adjoint(self):
        for j in range(2):
            self.assertAlmostEqual(delta_apply(self.f, j).inner(self.g),
                                   self.f.inner(delta_star_apply(self.g, j)), places=12)

    def test_factorization(self):
        diff = factorized_oscillator(self.f) - oscillator_apply(self.f)
        self.assertLess(diff.norm(), 1e-12 * oscillator_apply(self.f).norm())

    def test_delta_kills_lowest_mode(self):
        f = SpectralFunction.basis(self.alpha, (0, 3))
        self.assertEqual(delta_apply(f, 0).coeffs, {})


class TestDunklDerivative(unittest.TestCase):
    def test_spectral_matches_difference_quotient(self):
        alpha = AlphaVector.of(0.7)
        f = SpectralFunction(alpha, {(0,): 1.0, (1,): 0.4, (2,): -0.3})
        x = np.array([[-1.2], [0.4], [1.7]])
        exact = dunkl_derivative(f, 0, x)
        numeric = dunkl_derivative(lambda p: f(p), 0, x, alpha)
        np.testing.assert_allclose(numeric, exact, atol=1e-6)

    def test_needs_alpha_for_callables(self):
        with self.assertRaises(ParameterDomainError):
            dunkl_derivative(lambda p: p[..., 0], 0, np.array([1.0]))

    def test_grid_without_negative_side(self):
        axis = np.linspace(0.0, 2.0, 21)
        grid = GridFunction.from_callable(lambda p: np.exp(-p[..., 0] ** 2), [axis])
        with self.assertRaises(PreconditionError):
            dunkl_derivative(grid, 0, np.array([1.0]), AlphaVector.of(0.0))


class TestGridFunction(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ParameterDomainError):
            GridFunction((np.array([0.0, 0.0, 1.0]),), np.zeros(3))
        with self.assertRaises(ParameterDomainError):
            GridFunction((np.linspace(0, 1, 4),), np.zeros(5))
        with self.assertRaises(ParameterDomainError):
            GridFunction((np.linspace(0, 1, 4),), np.zeros(4), order=2)

    def test_interpolates_inside_only(self):
        axis = np.linspace(-2.0, 2.0, 41)
        grid = GridFunction.from_callable(lambda p: p[..., 0] ** 2, [axis], order=3)
        self.assertAlmostEqual(float(grid(np.array([0.55]))), 0.3025, places=8)
        with self.assertRaises(PreconditionError):
            grid(np.array([2.5]))


class TestSemigroups(unittest.TestCase):
    def setUp(self):
        self.alpha = AlphaVector.of(0.5)
        self.f = SpectralFunction(self.alpha, {(0,): 1.0, (2,): 0.5, (3,): -0.25})

    def test_heat_on_basis(self):
        out = heat_apply(SpectralFunction.basis(self.alpha, (2,)), 0.3)
        self.assertAlmostEqual(out.coefficient((2,)), math.exp(-0.3 * eigenvalue(2, self.alpha)))

    def test_semigroup_law(self):
        left = heat_apply(heat_apply(self.f, 0.2), 0.5)
        right = heat_apply(self.f, 0.7)
        self.assertLess((left - right).norm(), 1e-14)
        left = poisson_apply(poisson_apply(self.f, 0.2), 0.5)
        self.assertLess((left - poisson_apply(self.f, 0.7)).norm(), 1e-14)

    def test_component_and_orthant_versions(self):
        odd = EpsVector.parse('1')
        component = heat_apply(self.f, 0.4, eps=odd)
        self.assertEqual(list(component.coeffs), [(3,)])
        orthant = heat_apply(self.f, 0.4, eps=odd, restricted=True)
        self.assertAlmostEqual(orthant.coefficient((3,)), 0.5 * component.coefficient((3,)))
        with self.assertRaises(ParameterDomainError):
            heat_apply(self.f, 0.4, restricted=True)

    def test_negative_time(self):
        with self.assertRaises(ParameterDomainError):
            heat_apply(self.f, -0.1)

    def test_grid_quadrature_matches_spectral(self):
        x = np.array([[-1.5], [0.0], [0.4], [2.0]])
        exact = heat_apply(self.f, 0.5)(x)
        numeric = heat_apply_grid(self.f, 0.5, self.alpha, x)
        np.testing.assert_allclose(numeric, exact, atol=1e-5)

    def test_grid_orthant_rejects_negative_points(self):
        with self.assertRaises(PreconditionError):
            heat_apply_grid(self.f, 0.5, self.alpha, np.array([[-1.0]]), EpsVector.zero(1), restricted=True)

    def test_subordination(self):
        lam = np.array([2.0, 7.5, 40.0, 200.0])
        for t in (0.1, 0.5, 2.0):
            np.testing.assert_allclose(subordinate(lam, t), np.exp(-t * np.sqrt(lam)), rtol=1e-9)
        np.testing.assert_allclose(subordinate(lam, 0.0), 1.0)
        with self.assertRaises(ParameterDomainError):
            subordinate(lam, 0.5, method='simpson')

    def test_poisson_by_subordination(self):
        exact = poisson_apply(self.f, 0.6)
        trapezoid = poisson_apply(self.f, 0.6, method='trapezoid')
        self.assertLess((exact - trapezoid).norm(), 1e-9)

    def test_grid_poisson_matches_spectral(self):
        alpha = AlphaVector.of(0.0)
        f = SpectralFunction.random(alpha, 5, 8, seed=1)
        x = np.linspace(-2.5, 2.5, 11)[:, None]
        for t in (0.1, 0.5, 1.5):
            for method in ('spectral', 'trapezoid'):
                exact = poisson_apply(f, t)(x)
                numeric = poisson_apply(lambda p: f(p), t, method=method, alpha=alpha, points=x)
                np.testing.assert_allclose(numeric, exact, atol=1e-8, err_msg=f"t={t} {method}")
        odd = EpsVector.parse('1')
        orthant = poisson_apply(lambda p: f(p), 0.1, eps=odd, restricted=True, alpha=alpha, points=x[5:])
        np.testing.assert_allclose(orthant, poisson_apply(f, 0.1, eps=odd, restricted=True)(x[5:]), atol=1e-10)
        with self.assertRaises(PreconditionError):
            poisson_apply(lambda p: f(p), 0.1, eps=odd, restricted=True, alpha=alpha, points=x)

    def test_spectral_projection_recovers_coefficients(self):
        f = SpectralFunction(self.alpha, {(0,): 1.0, (2,): 0.5, (7,): -0.25})
        projected = spectral_projection(lambda p: f(p), self.alpha, max_length=10)
        for m in range(11):
            self.assertAlmostEqual(projected.coefficient((m,)), f.coefficient((m,)), places=10)

    def test_grid_poisson_needs_covering_grid(self):
        grid = GridFunction.from_callable(self.f, [np.linspace(-3.0, 3.0, 61)])
        with self.assertRaises(PreconditionError):
            poisson_apply(grid, 0.5, alpha=self.alpha)
        with self.assertRaises(ParameterDomainError):
            poisson_apply(grid, 0.5)

    def test_parity_part(self):
        even = lambda p: np.exp(-np.sum(p ** 2, axis=-1))
        y = np.array([[0.5, 1.0]])
        self.assertAlmostEqual(float(parity_part(even, y, EpsVector.parse('00'))), 4 * math.exp(-1.25))
        self.assertAlmostEqual(float(parity_part(even, y, EpsVector.parse('10'))), 0.0)


if __name__ == '__main__':
    unittest.main()
