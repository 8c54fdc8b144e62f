import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from src.cache import AuditCache
from src.czcheck import (
    AuditSamples, FAMILIES, TripleGrid, audit_suite, build_audit, build_grids, family_kernels,
    growth_audit, growth_by_scale, sample_rows, smoothness_audit,
)
from src.models import AlphaVector, EpsVector, ParameterDomainError, PreconditionError, RunConfig


def _samples(level, norms, ratios=None, separations=None):
    norms = np.asarray(norms, dtype=float)
    n = len(norms)
    ratios = np.ones(n) if ratios is None else np.asarray(ratios, dtype=float)
    separations = np.ones(n) if separations is None else np.asarray(separations, dtype=float)
    points = [(np.array([1.0]), None, np.array([1.0 + s]), None) for s in separations]
    return AuditSamples(level, norms, np.ones(n), 2.0 * np.ones(n), ratios, separations, points)


class TestTripleGrid(unittest.TestCase):
    def test_build_is_valid(self):
        for d in (1, 2):
            grid = TripleGrid.build(d, 2)
            self.assertTrue(grid.pairs)
            self.assertTrue(grid.x_triples)
            self.assertTrue(grid.y_triples)
            for x, y in grid.pairs:
                self.assertTrue(np.all(x >= 0) and np.all(y >= 0))

    def test_levels_refine(self):
        grids = build_grids(1, 3)
        self.assertEqual([g.level for g in grids], [1, 2, 3])
        self.assertLess(len(grids[0].pairs), len(grids[2].pairs))
        smallest = min(np.linalg.norm(x - y) for x, y in grids[2].pairs)
        self.assertAlmostEqual(smallest, 2.0 ** -4)

    def test_rejects_level_zero(self):
        with self.assertRaises(ParameterDomainError):
            TripleGrid.build(1, 0)

    def test_validate_rejects_degenerate_pair(self):
        grid = TripleGrid(1, pairs=[(np.array([1.0]), np.array([1.0]))])
        with self.assertRaises(PreconditionError):
            grid.validate()

    def test_validate_rejects_close_triple(self):
        grid = TripleGrid(1, x_triples=[(np.array([1.0]), np.array([1.6]), np.array([2.0]))])
        with self.assertRaises(PreconditionError):
            grid.validate()

    def test_unknown_audit(self):
        with self.assertRaises(ParameterDomainError):
            TripleGrid.build(1, 1).samples('z')


class TestFamilies(unittest.TestCase):
    def test_table_entries(self):
        self.assertEqual(len(FAMILIES), 9)
        self.assertEqual(FAMILIES['gV'].delta, 1.0)
        self.assertEqual(FAMILIES['SH'].delta, 0.5)

    def test_family_kernels(self):
        alpha = AlphaVector.of(0.0, 1.0)
        eps = EpsVector.parse('01')
        labels = [label for label, _ in family_kernels('gH', alpha, eps)]
        self.assertEqual(labels, ['gH[j=1]/eps01', 'gH[j=2]/eps01'])
        self.assertEqual([label for label, _ in family_kernels('SV', alpha, eps)], ['SV/eps01'])

    def test_laguerre_families(self):
        alpha = AlphaVector.of(0.0, 1.0)
        tilde = family_kernels('SHTtilde', alpha)
        self.assertEqual(len(tilde), 4)
        derivatives = {label: family.derivative for label, family in tilde}
        self.assertEqual(derivatives['SHTtilde[j=1,i=1]'], 'delta_star')
        self.assertEqual(derivatives['SHTtilde[j=1,i=2]'], 'delta')
        _, family = tilde[0]
        self.assertEqual((family.prefactor, family.shift), (4.0, 2.0))
        _, vertical = family_kernels('SVT', alpha)[0]
        self.assertEqual(vertical.eps, EpsVector.zero(2))

    def test_errors(self):
        alpha = AlphaVector.of(0.0)
        with self.assertRaises(ParameterDomainError):
            family_kernels('gX', alpha, EpsVector.zero(1))
        with self.assertRaises(ParameterDomainError):
            family_kernels('gV', alpha)


class TestBuildAudit(unittest.TestCase):
    def test_stable_constants_pass(self):
        levels = [_samples(1, [1.0, 2.0]), _samples(2, [1.5, 2.5, 0.1]), _samples(3, [2.6])]
        audit = build_audit('gV/eps0', 'tdt', 'growth', None, levels)
        self.assertTrue(audit.passed)
        self.assertEqual([lv.constant for lv in audit.levels], [2.0, 2.5, 2.6])
        self.assertEqual([lv.constant_cube for lv in audit.levels], [4.0, 5.0, 5.2])

    def test_growing_constants_fail(self):
        levels = [_samples(1, [1.0]), _samples(2, [4.0]), _samples(3, [16.0])]
        audit = build_audit('gV/eps0', 'tdt', 'growth', None, levels)
        self.assertFalse(audit.passed)
        self.assertFalse(audit.levels[1].passed)

    def test_single_level_is_not_enough(self):
        self.assertFalse(build_audit('gV', 'tdt', 'growth', None, [_samples(1, [1.0])]).passed)

    def test_nonfinite_constant_fails(self):
        levels = [_samples(1, [np.inf]), _samples(2, [1.0])]
        audit = build_audit('gV', 'tdt', 'growth', None, levels)
        self.assertFalse(audit.passed)
        self.assertFalse(audit.levels[0].passed)

    def test_smoothness_exponent_scales(self):
        samples = _samples(1, [1.0], ratios=[0.25])
        main, _ = samples.contributions(1.0)
        self.assertAlmostEqual(float(main[0]), 4.0)
        main, _ = samples.contributions(0.5)
        self.assertAlmostEqual(float(main[0]), 2.0)

    def test_negative_control_flag(self):
        levels = [_samples(1, [1.0], ratios=[0.25]), _samples(2, [1.0], ratios=[2.0 ** -5])]
        audit = build_audit('gV', 'tdt', 'x', 1.5, levels, expect_failure=True)
        self.assertTrue(audit.expect_failure)
        self.assertFalse(audit.passed)

    @patch('src.czcheck.collect_samples')
    def test_growth_audit_collects_every_level(self, mock_collect):
        mock_collect.side_effect = lambda family, space, audit, grid, *args: _samples(grid.level, [1.0, 1.2])
        _, family = family_kernels('gV', AlphaVector.of(0.0), EpsVector.zero(1))[0]
        audit = growth_audit('gV/eps0', family, 'tdt', build_grids(1, 3))
        self.assertEqual(mock_collect.call_count, 3)
        self.assertEqual(mock_collect.call_args[0][2], 'growth')
        self.assertIsNone(audit.delta)
        self.assertEqual([lv.k for lv in audit.levels], [1, 2, 3])
        self.assertTrue(audit.passed)

    def test_smoothness_rejects_unknown_side(self):
        with self.assertRaises(ParameterDomainError):
            smoothness_audit('gV', None, 'tdt', 'z', 1.0, [])


class TestReporting(unittest.TestCase):
    def test_growth_by_scale(self):
        samples = _samples(1, [1.0, 3.0, 2.0], separations=[0.5, 0.5, 1.0])
        self.assertEqual(growth_by_scale(samples), {'0.5': 3.0, '1': 2.0})

    def test_sample_rows(self):
        rows = sample_rows('gV', 'tdt', 'growth', _samples(2, [1.0], separations=[0.25]), 0.0)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['level'], 2)
        self.assertEqual(rows[0]['x_prime'], '')
        self.assertEqual(rows[0]['y'], '1.25')
        self.assertEqual(rows[0]['contribution'], '1')


class TestAuditSuite(unittest.TestCase):
    def setUp(self):
        self.config = RunConfig('cz-audit', d=1, alphas=((0.0,),), level=2, options=(('family', 'gV'),))

    @patch('src.czcheck.collect_samples')
    def test_audits_per_family_eps_and_kind(self, mock_collect):
        mock_collect.side_effect = lambda family, space, audit, grid, *args, **kwargs: (
            _samples(grid.level, [1.0], ratios=[4.0 ** -grid.level]))
        rows = []
        result = audit_suite(self.config, rows=rows)
        # 2 eps components x 3 audits, plus the negative control
        self.assertEqual(len(result.audits), 7)
        control = result.audits[-1]
        self.assertTrue(control.expect_failure)
        self.assertEqual(control.delta, 1.5)
        self.assertTrue(rows)
        self.assertIn('growth_by_scale', result.data)

    @patch('src.czcheck.collect_samples')
    def test_cached_audits_are_reused(self, mock_collect):
        mock_collect.side_effect = lambda family, space, audit, grid, *args, **kwargs: _samples(grid.level, [1.0])
        with tempfile.TemporaryDirectory() as tmp:
            cache_file = os.path.join(tmp, 'audit_cache.json')
            first, second = [], []
            with AuditCache('abc', cache_file) as cache:
                before = audit_suite(self.config, cache=cache, rows=first)
            calls = mock_collect.call_count
            with AuditCache('abc', cache_file) as cache:
                self.assertEqual(len(cache), 6)
                after = audit_suite(self.config, cache=cache, rows=second)
        self.assertEqual(second, first)
        self.assertEqual(after.data, before.data)
        self.assertEqual(after.audits, before.audits)
        # only the negative control is recomputed
        self.assertEqual(mock_collect.call_count - calls, 2)

    def test_unknown_family(self):
        config = RunConfig('cz-audit', d=1, alphas=((0.0,),), level=2, options=(('family', 'gQ'),))
        with self.assertRaises(ParameterDomainError):
            audit_suite(config)


if __name__ == '__main__':
    unittest.main()
