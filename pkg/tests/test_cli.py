import io
import json
import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from src.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, build_parser, build_run_config, main, parse_alphas
from src.config import LOGGER_NAME
from src.models import DunklError, ParameterDomainError, SuiteResult, UsageError


def _passing(name='ortho'):
    result = SuiteResult(name)
    result.add('orthonormality', 1e-14, 1e-8, True)
    return result


def _failing(name='ortho'):
    result = SuiteResult(name)
    result.add('orthonormality', 1e-2, 1e-8, False)
    return result


class TestParseAlphas(unittest.TestCase):
    def test_scalar_is_broadcast(self):
        self.assertEqual(parse_alphas(['0.5'], 2), ((0.5, 0.5),))

    def test_vectors_and_separators(self):
        self.assertEqual(parse_alphas(['0,1;1,2', '3 4'], 2), ((0.0, 1.0), (1.0, 2.0), (3.0, 4.0)))

    def test_bad_value(self):
        with self.assertRaises(UsageError):
            parse_alphas(['a,b'], 2)
        with self.assertRaises(UsageError):
            parse_alphas([';'], 1)


class TestBuildRunConfig(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        logging.getLogger(LOGGER_NAME).setLevel(logging.CRITICAL)

    def tearDown(self):
        """Clean up after each test."""
        self.tmp.cleanup()
        logging.getLogger(LOGGER_NAME).setLevel(logging.INFO)

    def _config_file(self, text):
        path = os.path.join(self.tmp.name, 'run.cfg')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = build_run_config(build_parser().parse_args(['ortho']))
        self.assertEqual(config.d, 1)
        self.assertEqual(config.alphas, ((-0.5,), (0.0,), (1.3,)))
        self.assertIsNone(config.eps)
        self.assertEqual(config.kernel.representation, 'bessel')

    def test_flags_override_config_file(self):
        path = self._config_file("# run settings\nd = 2\nalpha = 0.5\nbeta = 2.0\nkernel = schlafli\n")
        args = build_parser().parse_args(['gv-identity', '--config', path, '--beta', '3', '--semigroup', 'both'])
        config = build_run_config(args)
        self.assertEqual(config.d, 2)
        self.assertEqual(config.alphas, ((0.5, 0.5),))
        self.assertEqual(config.beta, 3.0)
        self.assertEqual(config.kernel.representation, 'schlafli')
        self.assertEqual(config.option('semigroup'), 'both')

    def test_unknown_config_key(self):
        path = self._config_file("colour = blue\n")
        with self.assertRaises(UsageError):
            build_run_config(build_parser().parse_args(['ortho', '--config', path]))

    def test_j_is_one_based(self):
        args = build_parser().parse_args(['squarefn', 'eval', '--kind', 'gH', '--j', '2', '--d', '2'])
        self.assertEqual(build_run_config(args).option('j'), 1)
        with self.assertRaises(UsageError):
            build_run_config(build_parser().parse_args(['squarefn', 'eval', '--j', '0']))

    def test_eps_parsing(self):
        args = build_parser().parse_args(['reduce', '--d', '2', '--eps', '01'])
        self.assertEqual(build_run_config(args).eps, (0, 1))
        with self.assertRaises(UsageError):
            build_run_config(build_parser().parse_args(['reduce', '--eps', '2']))

    def test_negative_control_flag(self):
        args = build_parser().parse_args(['cz-audit', '--no-negative-control', '--family', 'gV'])
        config = build_run_config(args)
        self.assertIs(config.option('negative_control'), False)
        self.assertEqual(config.option('family'), 'gV')

    def test_invalid_dimension(self):
        with self.assertRaises(UsageError):
            build_run_config(build_parser().parse_args(['ortho', '--d', '5']))


class TestMain(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        """Clean up after each test."""
        self.tmp.cleanup()
        logging.getLogger(LOGGER_NAME).setLevel(logging.INFO)

    def _run(self, argv):
        with patch('sys.stdout', new_callable=io.StringIO) as out, \
                patch('sys.stderr', new_callable=io.StringIO) as err:
            code = main(argv + ['--quiet', '--out', self.tmp.name])
        return code, out.getvalue(), err.getvalue()

    @patch('src.cli.run_suite')
    def test_pass_writes_report(self, mock_run):
        mock_run.return_value = _passing()
        code, out, _ = self._run(['ortho'])
        self.assertEqual(code, EXIT_PASS)
        self.assertIn('ortho: PASS', out)
        with open(os.path.join(self.tmp.name, 'report.json')) as f:
            report = json.load(f)
        self.assertTrue(report['passed'])
        self.assertEqual(report['config']['suite'], 'ortho')

    @patch('src.cli.run_suite')
    def test_fail_prints_detail(self, mock_run):
        mock_run.return_value = _failing()
        code, out, _ = self._run(['ortho'])
        self.assertEqual(code, EXIT_FAIL)
        self.assertIn('"failed_checks"', out)

    @patch('src.cli.run_suite')
    def test_tables_and_plots_are_written(self, mock_run):
        def fake_run(name, ctx):
            ctx.tables['squarefn.csv'] = [{'alpha': '0', 'x': '1', 'kind': 'gV', 'semigroup': 'heat',
                                           'variant': 'full', 'value': '0.5', 'error_estimate': '0'}]
            ctx.plots['squarefn.svg'] = {'series': {'alpha=(0)': [(1.0, 0.5), (2.0, 0.25)]}, 'title': 'gV'}
            return _passing('squarefn')

        mock_run.side_effect = fake_run
        code, _, _ = self._run(['squarefn', 'eval'])
        self.assertEqual(code, EXIT_PASS)
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, 'squarefn.csv')))
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, 'squarefn.svg')))

    @patch('src.cli.run_suite', side_effect=ParameterDomainError('bad alpha'))
    def test_domain_error_is_usage(self, _):
        code, _, err = self._run(['ortho'])
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('bad alpha', err)

    @patch('src.cli.run_suite', side_effect=DunklError('quadrature did not converge'))
    def test_runtime_error_fails(self, _):
        code, out, _ = self._run(['ortho'])
        self.assertEqual(code, EXIT_FAIL)
        self.assertIn('quadrature did not converge', out)

    def test_usage_errors(self):
        self.assertEqual(self._run(['no-such-suite'])[0], EXIT_USAGE)
        self.assertEqual(self._run(['ortho', '--bogus'])[0], EXIT_USAGE)
        self.assertEqual(self._run(['squarefn', 'eval', '--j', '0'])[0], EXIT_USAGE)
        self.assertEqual(self._run(['ortho', '--level', '1'])[0], EXIT_USAGE)


if __name__ == '__main__':
    unittest.main()
