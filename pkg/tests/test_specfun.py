import math
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.special import eval_genlaguerre, ive

from src.models import AlphaVector, MultiIndex, ParameterDomainError
from src.specfun import (
    bessel_i_ratio, classical_hermite_functions, delta_hermite_1d, gram_1d, hermite_1d,
    hermite_1d_all, hermite_gen, laguerre_all, laguerre_poly, normalizing_const,
    orthonormality_defect, phi_factor,
)


class TestLaguerre(unittest.TestCase):
    def test_matches_scipy(self):
        r = np.linspace(0.0, 12.0, 13)
        for a in (-0.5, 0.0, 1.3, 4.0):
            table = laguerre_all(10, a, r)
            for m in range(11):
                np.testing.assert_allclose(table[..., m], eval_genlaguerre(m, a, r), rtol=1e-10, atol=1e-10)

    def test_low_degrees(self):
        self.assertEqual(laguerre_poly(0, 0.7, 3.0), 1.0)
        self.assertAlmostEqual(laguerre_poly(1, 0.7, 3.0), 1.7 - 3.0)

    def test_domain_errors(self):
        with self.assertRaises(ParameterDomainError):
            laguerre_poly(-1, 0.0, 1.0)
        with self.assertRaises(ParameterDomainError):
            laguerre_all(3, -1.0, 1.0)


class TestBesselRatio(unittest.TestCase):
    def test_matches_scaled_bessel(self):
        u = np.concatenate([np.linspace(0.01, 29.0, 40), np.linspace(31.0, 400.0, 40)])
        for nu in (-0.5, 0.0, 0.5, 1.3, 3.0):
            expected = ive(nu, u) / u ** nu
            np.testing.assert_allclose(bessel_i_ratio(nu, u, scaled=True), expected, rtol=1e-10)

    def test_unscaled_moderate_arguments(self):
        u = np.array([0.5, 5.0, 20.0])
        np.testing.assert_allclose(bessel_i_ratio(1.0, u), ive(1.0, u) * np.exp(u) / u, rtol=1e-10)

    def test_value_at_zero(self):
        for nu in (-0.5, 0.0, 2.0):
            expected = 1.0 / (2.0 ** nu * math.gamma(nu + 1.0))
            self.assertAlmostEqual(bessel_i_ratio(nu, 0.0), expected, places=14)

    def test_half_order_closed_form(self):
        u = np.array([0.3, 2.0, 45.0])
        expected = np.sqrt(2.0 / np.pi) * np.cosh(u) * np.exp(-u)
        np.testing.assert_allclose(bessel_i_ratio(-0.5, u, scaled=True), expected, rtol=1e-12)

    def test_rejects_bad_input(self):
        with self.assertRaises(ParameterDomainError):
            bessel_i_ratio(-0.7, 1.0)
        with self.assertRaises(ParameterDomainError):
            bessel_i_ratio(0.0, -1.0)


class TestHermite(unittest.TestCase):
    def test_normalizing_const_positive(self):
        for k in range(8):
            self.assertGreater(normalizing_const(k, 0.25), 0)
        with self.assertRaises(ParameterDomainError):
            normalizing_const(1, -0.75)

    def test_gram_is_identity(self):
        for a in (-0.5, 0.0, 1.3, 3.7):
            np.testing.assert_allclose(gram_1d(16, a), np.eye(17), atol=1e-9)

    def test_orthonormality_defect_multivariate(self):
        self.assertLess(orthonormality_defect(AlphaVector.of(0.0, 1.3), 6), 1e-10)
        self.assertLess(orthonormality_defect(AlphaVector.of(-0.5, 0.2, 2.0), 4), 1e-10)

    def test_classical_reduction(self):
        x = np.linspace(-4.0, 4.0, 33)
        np.testing.assert_allclose(hermite_1d_all(12, -0.5, x), classical_hermite_functions(12, x), atol=1e-10)

    def test_ladder_rule(self):
        x = np.linspace(-3.0, 3.0, 19)
        for a in (-0.5, 0.0, 1.3):
            for k in range(1, 12):
                np.testing.assert_allclose(delta_hermite_1d(k, a, x), phi_factor(k, a) * hermite_1d(k - 1, a, x),
                                           atol=1e-10)
            np.testing.assert_allclose(delta_hermite_1d(0, a, x), 0.0)

    def test_phi_factor(self):
        self.assertEqual(phi_factor(0, 1.0), 0.0)
        self.assertAlmostEqual(phi_factor(2, 1.0), 2.0)
        self.assertAlmostEqual(phi_factor(1, 1.0), math.sqrt(8.0))
        with self.assertRaises(ParameterDomainError):
            phi_factor(-1, 0.0)

    def test_negative_degree_is_zero(self):
        self.assertEqual(hermite_1d(-1, 0.0, 0.5), 0.0)

    def test_tensor_product(self):
        alpha = AlphaVector.of(0.0, 1.0)
        x = np.array([[0.3, -1.2], [2.0, 0.5]])
        expected = hermite_1d(2, 0.0, x[:, 0]) * hermite_1d(3, 1.0, x[:, 1])
        np.testing.assert_allclose(hermite_gen((2, 3), alpha, x), expected)

    def test_invalid_index_gives_zero(self):
        alpha = AlphaVector.of(0.0, 1.0)
        self.assertEqual(hermite_gen(MultiIndex.of(1, -1), alpha, np.array([0.4, 0.2])), 0.0)

    def test_dimension_mismatch(self):
        with self.assertRaises(ParameterDomainError):
            hermite_gen((1,), AlphaVector.of(0.0, 1.0), np.array([0.1]))

    @settings(max_examples=30, deadline=None)
    @given(k=st.integers(min_value=0, max_value=15), a=st.floats(min_value=-0.5, max_value=5.0),
           x=st.floats(min_value=-5.0, max_value=5.0))
    def test_parity(self, k, a, x):
        self.assertAlmostEqual(hermite_1d(k, a, -x), (-1) ** k * hermite_1d(k, a, x), places=10)


if __name__ == '__main__':
    unittest.main()
