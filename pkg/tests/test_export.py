import json
import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from src.config import LOGGER_NAME, SQUAREFN_CSV_HEADERS
from src.export import read_report, svg_plot, write_csv, write_report, write_svg
from src.models import AuditLevel, EstimateAudit, SuiteResult, VerificationReport
from src.utils import canonical_json, config_hash, format_seconds, format_value


class TestExport(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        logging.getLogger(LOGGER_NAME).setLevel(logging.CRITICAL)
        suite = SuiteResult('ortho')
        suite.add('orthonormality defect', 1e-13, 1e-8, True)
        suite.audits.append(EstimateAudit('gV/eps0', 'tdt', 'growth', None, [AuditLevel(1, 1.0, 1.5, 4)], True))
        suite.data['gamma_constant'] = 0.75
        self.report = VerificationReport({'suite': 'ortho', 'd': 1}, 'abc123def456', [suite])

    def tearDown(self):
        """Clean up after each test."""
        self.tmp.cleanup()
        logging.getLogger(LOGGER_NAME).setLevel(logging.INFO)

    def test_report_round_trip(self):
        path = write_report(self.report, os.path.join(self.tmp.name, 'out'))
        with open(path) as f:
            data = json.load(f)
        self.assertEqual(data['schema_version'], 1)
        self.assertTrue(data['passed'])
        restored = read_report(path)
        self.assertEqual(restored.suites[0].checks, self.report.suites[0].checks)
        self.assertEqual(restored.suites[0].audits, self.report.suites[0].audits)

    def test_csv_format(self):
        rows = [
            {'alpha': '0.5', 'x': '0.1', 'kind': 'gV/heat/full', 'semigroup': 'heat', 'variant': 'full',
             'value': '1.5', 'error_estimate': '0'},
            {'alpha': '0.5', 'x': '0.2', 'kind': 'gV/heat/full', 'semigroup': 'heat', 'variant': 'full',
             'value': 'a,b', 'error_estimate': '0'},
        ]
        path = write_csv(rows, SQUAREFN_CSV_HEADERS, os.path.join(self.tmp.name, 'squarefn.csv'), 'h1',
                         progress=False)
        with open(path, newline='') as f:
            content = f.read()
        lines = content.split('\r\n')
        self.assertEqual(lines[0], ','.join(SQUAREFN_CSV_HEADERS))
        self.assertTrue(lines[1].endswith(',h1'))
        self.assertIn('"a,b"', lines[2])
        self.assertEqual(lines[-1], '')

    @patch('builtins.open', side_effect=IOError('read-only'))
    def test_csv_error(self, _):
        self.assertIsNone(write_csv([], SQUAREFN_CSV_HEADERS, os.path.join(self.tmp.name, 'x.csv'), 'h',
                                    progress=False))

    def test_svg(self):
        series = {'C_k': [(1, 2.0), (2, 2.5), (3, 2.6)], 'bad': [(1, float('nan'))]}
        text = svg_plot(series, title='growth <k>', logy=True)
        self.assertTrue(text.startswith('<svg'))
        self.assertIn('<polyline', text)
        self.assertIn('growth &lt;k&gt;', text)
        path = write_svg(os.path.join(self.tmp.name, 'plot.svg'), series, scatter=True)
        with open(path) as f:
            self.assertIn('<circle', f.read())

    def test_empty_svg(self):
        self.assertIn('</svg>', svg_plot({}))


class TestUtils(unittest.TestCase):
    def test_config_hash_is_stable(self):
        a = {'d': 1, 'alphas': [[0.5]], 'beta': 1.0}
        b = {'beta': 1.0, 'alphas': [[0.5]], 'd': 1}
        self.assertEqual(config_hash(a), config_hash(b))
        self.assertEqual(len(config_hash(a)), 12)
        self.assertNotEqual(config_hash(a), config_hash({**a, 'beta': 2.0}))
        self.assertEqual(canonical_json({'b': 1, 'a': 2}), '{"a":2,"b":1}')

    def test_format_seconds(self):
        self.assertEqual(format_seconds(5), "5.0s")
        self.assertEqual(format_seconds(65), "1m 5s")
        self.assertEqual(format_seconds(3665), "1h 1m")
        self.assertEqual(format_seconds(-1), "Unknown duration")
        self.assertEqual(format_seconds("invalid"), "Unknown duration")

    def test_format_value(self):
        self.assertEqual(format_value(0.1 + 0.2), '0.3')
        self.assertEqual(format_value(1e-20), '1e-20')


if __name__ == '__main__':
    unittest.main()
