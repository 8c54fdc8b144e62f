import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from src.models import (
    AlphaVector, ConeSpec, EpsVector, MultiIndex, ParameterDomainError, PreconditionError,
)
from src.operators import SpectralFunction
from src.symmetry import (
    ProjectedFunction, ReflectionSignature, decomposition_defect, eps_project, extend_eps,
    inner_product_bridge, norm_equivalence_ratio, reduction_verify, restrict_plus, symmetry_defect,
)


def _asymmetric(x):
    return np.exp(-0.5 * np.sum(x ** 2, axis=-1)) * (1.0 + x[..., 0] + 0.3 * x[..., 0] * x[..., 1] ** 2)


class TestReflections(unittest.TestCase):
    def test_signature(self):
        eta = ReflectionSignature.sigma(3, 1)
        self.assertEqual(eta.eta, (1, -1, 1))
        self.assertEqual(eta.power(EpsVector.parse('010')), -1)
        self.assertEqual(eta.power(EpsVector.parse('101')), 1)
        np.testing.assert_array_equal(eta.apply([1.0, 2.0, 3.0]), [1.0, -2.0, 3.0])
        self.assertEqual(len(list(ReflectionSignature.all(2))), 4)

    def test_invalid_signature(self):
        with self.assertRaises(ParameterDomainError):
            ReflectionSignature((1, 0))


class TestProjection(unittest.TestCase):
    def setUp(self):
        self.points = np.array([[0.3, -1.2], [-0.7, 0.4], [1.5, 2.0], [0.0, -0.9]])

    def test_components_sum_to_function(self):
        self.assertLess(decomposition_defect(_asymmetric, 2, self.points), 1e-12)

    @settings(max_examples=25, deadline=None)
    @given(coeffs=st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=4, max_size=4),
           eps_bits=st.tuples(st.integers(0, 1), st.integers(0, 1)))
    def test_projection_is_idempotent(self, coeffs, eps_bits):
        a, b, c, e = coeffs

        def f(x):
            return a + b * x[..., 0] + c * x[..., 0] * x[..., 1] + e * np.sin(x[..., 1]) * x[..., 0] ** 2

        eps = EpsVector(eps_bits)
        once = ProjectedFunction(f, eps)
        twice = ProjectedFunction(once, eps)
        np.testing.assert_allclose(twice(self.points), once(self.points), atol=1e-12)
        for eta in ReflectionSignature.all(2):
            np.testing.assert_allclose(once(eta.apply(self.points)), eta.power(eps) * once(self.points),
                                       atol=1e-12)

    def test_spectral_projection_filters_coefficients(self):
        alpha = AlphaVector.of(0.0, 0.5)
        f = SpectralFunction.random(alpha, 8, 6, seed=4)
        eps = EpsVector.parse('01')
        projected = eps_project(f, eps)
        self.assertTrue(all(MultiIndex(m).in_parity(eps) for m in projected.coeffs))
        np.testing.assert_allclose(projected(self.points), ProjectedFunction(f, eps)(self.points), atol=1e-12)

    def test_spectral_dimension_mismatch(self):
        f = SpectralFunction.basis(AlphaVector.of(0.0), (1,))
        with self.assertRaises(ParameterDomainError):
            eps_project(f, EpsVector.parse('01'))

    def test_restrict_and_extend(self):
        eps = EpsVector.parse('10')
        f_eps = ProjectedFunction(_asymmetric, eps)
        extended = extend_eps(restrict_plus(f_eps), eps)
        np.testing.assert_allclose(extended(self.points), f_eps(self.points), atol=1e-12)
        with self.assertRaises(PreconditionError):
            restrict_plus(f_eps)(np.array([[-0.1, 1.0]]))


class TestBridges(unittest.TestCase):
    def test_inner_product_bridge(self):
        alpha = AlphaVector.of(1.3, 0.0)
        f = SpectralFunction.random(alpha, 6, 6, seed=9)
        eps = EpsVector.parse('11')
        for m in [(1, 1), (3, 1), (1, 5)]:
            full, plus = inner_product_bridge(f, m, eps)
            self.assertAlmostEqual(full, plus, places=10)
            self.assertAlmostEqual(full, f.coefficient(m), places=10)

    def test_norm_equivalence_bracket(self):
        alpha = AlphaVector.of(0.5, 0.0)
        d = alpha.d
        for p in (1.5, 2.0, 3.0):
            ratio = norm_equivalence_ratio(_asymmetric, alpha, p)
            self.assertGreaterEqual(ratio, 2.0 ** (d / p - d) * (1 - 1e-12))
            self.assertLessEqual(ratio, 2.0 ** (d / p) * (1 + 1e-12))

    def test_horizontal_field_symmetry(self):
        alpha = AlphaVector.of(0.5, 1.0)
        f = SpectralFunction.random(alpha, 6, 6, seed=2)
        points = np.array([[0.4, 1.1], [1.3, 0.2]])
        for eps in EpsVector.all(2):
            self.assertLess(symmetry_defect(eps_project(f, eps), 0, eps, points, 0.5), 1e-10)


class TestReduction(unittest.TestCase):
    def test_rejects_points_on_hyperplanes(self):
        f = SpectralFunction.basis(AlphaVector.of(0.0), (1,))
        with self.assertRaises(PreconditionError):
            reduction_verify(f, 0, [[0.0]])

    def test_reduction_inequality_1d(self):
        alpha = AlphaVector.of(0.5)
        f = SpectralFunction(alpha, {(0,): 1.0, (1,): 0.6, (2,): -0.3})
        report = reduction_verify(f, 0, [[0.7]], ConeSpec(1.0, 8))
        self.assertTrue(report.passed, report.violations)
        self.assertEqual(len(report.rows), 1)
        self.assertEqual(len(report.rows[0].components), 2)
        self.assertGreater(report.rows[0].lhs, 0.0)
        self.assertLessEqual(report.rows[0].lhs, report.rows[0].middle * (1 + report.slack) + 1e-14)


if __name__ == '__main__':
    unittest.main()
