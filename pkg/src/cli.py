"""Command-line driver for the verification suites.

Exit status: 0 when every selected check passes, 1 when a check fails (the
failing checks are printed as JSON), 2 for usage errors.
"""

import argparse
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

from src.batch import BatchEvaluator
from src.config import (
    AUDIT_CSV_HEADERS, SQUAREFN_CSV_HEADERS, load_config_file, logger, setup_logger,
)
from src.export import write_csv, write_report, write_svg
from src.models import (
    DunklError, EpsVector, KernelEvalConfig, ParameterDomainError, RunConfig, SuiteResult, UsageError,
    VerificationReport,
)
from src.suites import SuiteContext, run_suite
from src.utils import config_hash, format_seconds

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_ALPHAS = (-0.5, 0.0, 1.3)
CSV_HEADERS = {
    'squarefn.csv': SQUAREFN_CSV_HEADERS,
    'cz_audit.csv': AUDIT_CSV_HEADERS,
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser raising UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    # every default is None so that config-file values can fill the gaps
    parser.add_argument('--d', type=int, help='Dimension (1, 2 or 3)')
    parser.add_argument('--alpha', action='append',
                        help='Multiplicity vector, comma separated; repeat for several (a scalar is broadcast)')
    parser.add_argument('--eps', help='Parity component, e.g. 01; default all 2^d components')
    parser.add_argument('--level', type=int, help='Number of nested audit grid levels')
    parser.add_argument('--beta', type=float, help='Cone aperture of the area integrals')
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--threads', type=int, help='Evaluation threads')
    parser.add_argument('--kernel', choices=['series', 'bessel', 'schlafli'], help='Kernel representation')
    parser.add_argument('--tol', type=float, help='Kernel accuracy tolerance')
    parser.add_argument('--seed', type=int, help='Seed of the random function families')
    parser.add_argument('--samples', type=int, help='Size of the random function families')
    parser.add_argument('--config', help='key=value config file (flags take precedence)')
    parser.add_argument('--log-file', action='store_true', help='Also log to a timestamped file')
    parser.add_argument('--quiet', action='store_true', help='Log warnings only and hide progress bars')
    parser.add_argument('--verbose', action='store_true', help='Log per-point detail')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='dunkl-square',
                     description='Numerical verification of Dunkl harmonic-oscillator square functions.')
    sub = parser.add_subparsers(dest='suite', parser_class=_Parser)
    sub.required = True

    for name, help_text in [
        ('ortho', 'Orthonormality of the generalized Hermite functions'),
        ('kernel-xcheck', 'Agreement of the series, Bessel and Schlafli kernels'),
        ('semigroup', 'Semigroup, factorization and subordination identities'),
        ('reduce', 'Reduction of S_H to its eps-plus components'),
        ('ap', 'Empirical A_p constants of power weights'),
    ]:
        _common_flags(sub.add_parser(name, help=help_text))

    p = sub.add_parser('gv-identity', help='||g_V^{eps,+} f|| = 2^{-d-1} ||f||')
    _common_flags(p)
    p.add_argument('--semigroup', choices=['heat', 'poisson', 'both'])

    p = sub.add_parser('squarefn', help='Pointwise square-function values (CSV and SVG)')
    p.add_argument('action', choices=['eval'])
    _common_flags(p)
    p.add_argument('--kind', choices=['gV', 'gH', 'gHstar', 'SV', 'SH', 'SHstar'])
    p.add_argument('--j', type=int, help='Coordinate of the horizontal kinds (1-based)')
    p.add_argument('--semigroup', choices=['heat', 'poisson'])
    p.add_argument('--function', help='JSON file with a SpectralFunction')
    p.add_argument('--points', type=int, help='Number of evaluation points')

    p = sub.add_parser('cz-audit', help='Calderon-Zygmund growth and smoothness audits')
    _common_flags(p)
    p.add_argument('--family', help='Comma-separated kernel families (default all)')
    p.add_argument('--delta', type=float, help='Smoothness exponent override')
    p.add_argument('--no-negative-control', action='store_true', help='Skip the delta=1.5 control audit')

    p = sub.add_parser('lp-probe', help='Weighted L^p and weak (1,1) probes')
    _common_flags(p)
    p.add_argument('--kind', choices=['gV', 'gH', 'gHstar'])
    p.add_argument('--j', type=int, help='Coordinate of the horizontal kinds (1-based)')
    p.add_argument('--semigroup', choices=['heat', 'poisson'])
    return parser


def parse_alphas(values: Sequence[str], d: int) -> Tuple[Tuple[float, ...], ...]:
    """Each value is one alpha vector; a single number is broadcast to d entries."""
    alphas = []
    for text in values:
        for chunk in str(text).split(';'):
            if not chunk.strip():
                continue
            try:
                entries = tuple(float(v) for v in chunk.replace(' ', ',').split(',') if v)
            except ValueError as e:
                raise UsageError(f"bad --alpha value {chunk!r}") from e
            if len(entries) == 1:
                entries = entries * d
            alphas.append(entries)
    if not alphas:
        raise UsageError("--alpha needs at least one vector")
    return tuple(alphas)


def _pick(flag, file_values: Dict[str, object], key: str, default):
    if flag is not None:
        return flag
    return file_values.get(key, default)


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags > config file > defaults into a validated RunConfig."""
    file_values = load_config_file(args.config)
    d = int(_pick(args.d, file_values, 'd', 1))
    alpha_text = args.alpha if args.alpha else ([file_values['alpha']] if 'alpha' in file_values else None)
    alphas = parse_alphas(alpha_text, d) if alpha_text else tuple((a,) * d for a in DEFAULT_ALPHAS)
    eps_text = _pick(args.eps, file_values, 'eps', None)
    try:
        eps = EpsVector.parse(str(eps_text)).entries if eps_text is not None else None
    except ParameterDomainError as e:
        raise UsageError(f"bad --eps value {eps_text!r}") from e
    defaults = KernelEvalConfig()
    try:
        kernel = KernelEvalConfig(
            representation=str(_pick(args.kernel, file_values, 'kernel', defaults.representation)),
            truncation=int(file_values.get('truncation', defaults.truncation)),
            nodes=int(file_values.get('nodes', defaults.nodes)),
            panels=int(file_values.get('panels', defaults.panels)),
            panel_points=int(file_values.get('panel_points', defaults.panel_points)),
            tolerance=float(_pick(args.tol, file_values, 'tol', defaults.tolerance)),
        )
    except ParameterDomainError as e:
        raise UsageError(str(e)) from e

    options: List[Tuple[str, object]] = []
    for key in ('semigroup', 'kind', 'function', 'points', 'family', 'delta', 'samples'):
        value = getattr(args, key, None)
        if value is not None:
            options.append((key, value))
    if getattr(args, 'j', None) is not None:
        if args.j < 1:
            raise UsageError("--j is 1-based")
        options.append(('j', args.j - 1))
    if getattr(args, 'no_negative_control', False):
        options.append(('negative_control', False))

    defaults_run = RunConfig(args.suite)
    return RunConfig(
        suite=args.suite,
        d=d,
        alphas=alphas,
        eps=eps,
        level=int(_pick(args.level, file_values, 'level', defaults_run.level)),
        beta=float(_pick(args.beta, file_values, 'beta', defaults_run.beta)),
        out=str(_pick(args.out, file_values, 'out', defaults_run.out)),
        threads=int(_pick(args.threads, file_values, 'threads', defaults_run.threads)),
        kernel=kernel,
        cone_points=int(file_values.get('cone_points', defaults_run.cone_points)),
        seed=int(_pick(args.seed, file_values, 'seed', defaults_run.seed)),
        options=tuple(sorted(options)),
    )


def _print_summary(result: SuiteResult, elapsed: float) -> None:
    print(f"\n=== {result.suite} ===")
    for check in result.checks:
        status = 'PASS' if check.passed else 'FAIL'
        print(f"{status}  {check.name}: {check.value:.6g} (threshold {check.threshold:.6g})")
    for audit in result.audits:
        ok = audit.passed != audit.expect_failure
        constants = ', '.join(f"{lv.constant:.4g}" for lv in audit.levels)
        print(f"{'PASS' if ok else 'FAIL'}  audit {audit.family} {audit.space} {audit.audit}: C_k = [{constants}]")
    print(f"\n{result.suite}: {'PASS' if result.passed else 'FAIL'} in {format_seconds(elapsed)}")


def _failure_detail(result: SuiteResult) -> Dict:
    return {
        'suite': result.suite,
        'failed_checks': [vars(c) for c in result.checks if not c.passed],
        'failed_audits': [a.family + ' ' + a.audit for a in result.audits if a.passed == a.expect_failure],
    }


def write_outputs(ctx: SuiteContext, report: VerificationReport) -> None:
    out = ctx.config.out
    write_report(report, out)
    for name, rows in ctx.tables.items():
        write_csv(rows, CSV_HEADERS[name], os.path.join(out, name), report.config_hash, progress=ctx.progress)
    for name, plot in ctx.plots.items():
        plot = dict(plot)
        write_svg(os.path.join(out, name), plot.pop('series'), **plot)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the verification CLI."""
    try:
        args = build_parser().parse_args(argv)
        level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose else logging.INFO)
        setup_logger(args.log_file, level)
        config = build_run_config(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE

    evaluator = BatchEvaluator(config.threads, progress=not args.quiet)
    ctx = SuiteContext(config, evaluator, progress=not args.quiet)
    start = time.time()
    try:
        result = run_suite(config.suite, ctx)
    except (UsageError, ParameterDomainError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DunklError as e:
        logger.error(f"Suite {config.suite} aborted: {e}")
        print(json.dumps({'suite': config.suite, 'error': str(e)}, indent=2))
        return EXIT_FAIL
    evaluator.log_statistics()

    settings = config.to_dict()
    report = VerificationReport(settings, config_hash(settings), [result])
    write_outputs(ctx, report)
    _print_summary(result, time.time() - start)
    if not result.passed:
        print(json.dumps(_failure_detail(result), indent=2, sort_keys=True))
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == '__main__':
    sys.exit(main())
