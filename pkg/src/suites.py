"""Verification suites run by the command-line interface.

Each suite takes a SuiteContext and returns a SuiteResult of named checks
(value, threshold, passed).  Tabular output and plots are collected on the
context and written by the CLI.
"""

import dataclasses
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from src.batch import BatchEvaluator
from src.cache import AuditCache
from src.config import (
    AUDIT_CACHE_FILE, IDENTITY_TOL, ORTHO_TOL, PANEL_WARN, REDUCTION_SLACK, REFINEMENT_RATIO,
    SEMIGROUP_TOL, SUBORDINATION_TOL, logger,
)
from src.czcheck import audit_suite
from src.kernel import (
    delta_j_kernel, delta_j_star_kernel, dt_heat_kernel, finite_difference_dt, heat_kernel,
    panel_sanity, series_truncation_for,
)
from src.measure import (
    ap_constant, box_rule, doubling_constant, dyadic_ball_family, orthant_rule, phi_alpha_log_bound,
)
from src.models import (
    AlphaVector, ConeSpec, EpsVector, MultiIndex, RunConfig, SquareFnKind, SuiteResult,
    UsageError,
)
from src.operators import (
    SpectralFunction, delta_apply, delta_star_apply, eigenvalue, factorized_oscillator, grid_points,
    heat_apply, heat_apply_grid, oscillator_apply, poisson_apply, subordinate,
)
from src.specfun import (
    classical_hermite_functions, delta_hermite_1d, hermite_1d, hermite_1d_all, orthonormality_defect,
    phi_factor,
)
from src.squarefn import (
    area_integral, evaluate, exact_grid, g_function, horizontal_l2_aggregate, weak11_probe,
    weighted_lp_ratio,
)
from src.symmetry import (
    decomposition_defect, inner_product_bridge, norm_equivalence_ratio, reduction_verify,
    symmetry_defect,
)
from src.utils import config_hash, format_value


@dataclass
class SuiteContext:
    config: RunConfig
    evaluator: BatchEvaluator
    progress: bool = True
    tables: Dict[str, List[Dict]] = field(default_factory=dict)
    plots: Dict[str, Dict] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.config.seed


def _alpha_label(alpha: AlphaVector) -> str:
    return ','.join(f'{a:g}' for a in alpha)


def _rel_error(value, reference) -> float:
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    floor = 1e-6 * max(float(np.max(np.abs(reference))), 1e-300)
    return float(np.max(np.abs(value - reference) / np.maximum(np.abs(reference), floor)))


def _coefficient_gap(a: SpectralFunction, b: SpectralFunction) -> float:
    return (a - b).norm() / max(b.norm(), 1e-300)


# ---------------------------------------------------------------------------
# ortho


def run_ortho(ctx: SuiteContext) -> SuiteResult:
    """Orthonormality, the ladder relation, the classical case and the zeta panels."""
    config = ctx.config
    result = SuiteResult('ortho')
    max_length = int(config.option('max_length', 8))
    xs = np.linspace(-3.0, 3.0, 25)
    for alpha in config.alpha_vectors:
        label = _alpha_label(alpha)
        defect = orthonormality_defect(alpha, max_length)
        result.add(f"orthonormality alpha=({label}) |m|<={max_length}", defect, ORTHO_TOL, defect <= ORTHO_TOL)

        worst = 0.0
        for a in sorted(set(alpha)):
            for k in range(1, 2 * max_length + 1):
                lhs = delta_hermite_1d(k, a, xs)
                rhs = phi_factor(k, a) * hermite_1d(k - 1, a, xs)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        result.add(f"ladder delta h_k = Phi h_(k-1) alpha=({label})", worst, ORTHO_TOL, worst <= ORTHO_TOL)

    classical = float(np.max(np.abs(hermite_1d_all(2 * max_length, -0.5, xs)
                                    - classical_hermite_functions(2 * max_length, xs))))
    result.add("alpha=-1/2 reduces to classical Hermite functions", classical, ORTHO_TOL, classical <= ORTHO_TOL)

    sanity = panel_sanity(config.kernel)
    result.add("zeta panels incomplete-Gamma closed form", sanity.gamma_max_rel_error, PANEL_WARN,
               sanity.gamma_max_rel_error <= PANEL_WARN)
    result.data['panel_gamma_constant'] = sanity.gamma_constant
    result.data['panel_log_constant'] = sanity.log_constant
    return result


# ---------------------------------------------------------------------------
# kernel-xcheck


KERNEL_COORDS = (0.6, 1.2, 1.8, 2.4, 3.0)
KERNEL_TIMES = (0.05, 0.1, 0.5, 1.5, 2.0)


def _kernel_evaluators(alpha: AlphaVector, eps: EpsVector) -> List[Tuple[str, Callable]]:
    evaluators = [
        ('G', lambda x, y, t, cfg: heat_kernel(x, y, t, alpha, eps, cfg).value),
        ('dtG', lambda x, y, t, cfg: dt_heat_kernel(x, y, t, alpha, eps, cfg).value),
    ]
    for j in range(alpha.d):
        evaluators.append((f'delta_{j + 1} G', lambda x, y, t, cfg, j=j: delta_j_kernel(x, y, t, alpha, j, eps, cfg).value))
        evaluators.append((f'delta*_{j + 1} G',
                           lambda x, y, t, cfg, j=j: delta_j_star_kernel(x, y, t, alpha, j, eps, cfg).value))
    return evaluators


def run_kernel_xcheck(ctx: SuiteContext) -> SuiteResult:
    """Series vs Bessel vs Schlafli for G and its derivatives on a grid of (x, y, t, eps)."""
    config = ctx.config
    result = SuiteResult('kernel-xcheck')
    tol = config.kernel.tolerance
    coords = np.array(list(itertools.product(KERNEL_COORDS, repeat=config.d)))
    x = np.repeat(coords, len(coords), axis=0)
    y = np.tile(coords, (len(coords), 1))
    truncations = {}
    for alpha in config.alpha_vectors:
        label = _alpha_label(alpha)
        for eps in config.eps_vectors:
            worst: Dict[str, float] = {}
            for t in KERNEL_TIMES:
                n = series_truncation_for(t, alpha, 1e-14)
                truncations[f"alpha=({label}) t={t:g}"] = n
                series_cfg = dataclasses.replace(config.kernel, representation='series', truncation=n)
                for name, fn in _kernel_evaluators(alpha, eps):
                    reference = fn(x, y, t, series_cfg)
                    for rep in ('bessel', 'schlafli'):
                        err = _rel_error(fn(x, y, t, config.kernel.with_representation(rep)), reference)
                        key = f"{name} {rep} vs series"
                        worst[key] = max(worst.get(key, 0.0), err)
                fd = finite_difference_dt(x, y, t, alpha, eps, config.kernel.with_representation('bessel'))
                exact = dt_heat_kernel(x, y, t, alpha, eps, config.kernel.with_representation('bessel')).value
                worst['dtG vs centered difference'] = max(worst.get('dtG vs centered difference', 0.0),
                                                   _rel_error(fd, exact))
            for key, err in worst.items():
                threshold = 1e-4 if 'centered' in key else tol
                result.add(f"{key} alpha=({label}) eps={eps}", err, threshold, err <= threshold)
    result.data['series_truncation'] = truncations
    return result


# ---------------------------------------------------------------------------
# semigroup


def run_semigroup(ctx: SuiteContext) -> SuiteResult:
    """Semigroup law, contraction, factorization, subordination and the grid path."""
    config = ctx.config
    result = SuiteResult('semigroup')
    times = (0.1, 0.5, 1.0)
    laguerre_gap = 0.0
    for idx, alpha in enumerate(config.alpha_vectors):
        label = _alpha_label(alpha)
        f = SpectralFunction.random(alpha, modes=6, max_length=6, seed=ctx.seed + idx)
        g = SpectralFunction.random(alpha, modes=6, max_length=6, seed=ctx.seed + 100 + idx)

        law = max(_coefficient_gap(heat_apply(heat_apply(f, t), s), heat_apply(f, t + s))
                  for t in times for s in times)
        result.add(f"T_t T_s = T_(t+s) alpha=({label})", law, 1e-12, law <= 1e-12)

        lam0 = eigenvalue(0, alpha)
        excess = max(heat_apply(f, t).norm() - math.exp(-t * lam0) * f.norm() for t in times)
        result.add(f"||T_t f|| <= e^(-t lambda_0) ||f|| alpha=({label})", excess, 1e-12, excess <= 1e-12)

        fact = _coefficient_gap(factorized_oscillator(f), oscillator_apply(f))
        result.add(f"L = 1/2 sum(delta* delta + delta delta*) alpha=({label})", fact, 1e-12, fact <= 1e-12)

        adjoint = max(abs(delta_apply(f, j).inner(g) - f.inner(delta_star_apply(g, j))) for j in range(alpha.d))
        result.add(f"<delta f, g> = <f, delta* g> alpha=({label})", adjoint, 1e-10, adjoint <= 1e-10)

        lams = np.array([eigenvalue(n, alpha) for n in range(21)])
        sub = max(float(np.max(np.abs(subordinate(lams, t) - np.exp(-t * np.sqrt(lams))))) for t in (0.1, 0.5, 1.0, 2.0))
        result.add(f"subordination (trapezoid) alpha=({label})", sub, SUBORDINATION_TOL, sub <= SUBORDINATION_TOL)
        laguerre_gap = max(laguerre_gap, max(
            float(np.max(np.abs(subordinate(lams, t, 'laguerre') - np.exp(-t * np.sqrt(lams)))))
            for t in (0.1, 0.5, 1.0, 2.0)))

        poisson_law = max(_coefficient_gap(poisson_apply(poisson_apply(f, t), s), poisson_apply(f, t + s))
                          for t in times for s in times)
        result.add(f"P_t P_s = P_(t+s) alpha=({label})", poisson_law, 1e-12, poisson_law <= 1e-12)

        if config.d == 1:
            xs = np.linspace(-2.5, 2.5, 11)[:, None]
            grid_err = 0.0
            for t in (0.3, 0.5, 1.0):
                exact = heat_apply(f, t)(xs)
                approx = heat_apply_grid(f, t, alpha, xs, cfg=config.kernel)
                grid_err = max(grid_err, float(np.max(np.abs(approx - exact))) / float(np.max(np.abs(exact))))
                chained = heat_apply_grid(heat_apply(f, 0.25), t, alpha, xs, cfg=config.kernel)
                exact = heat_apply(f, t + 0.25)(xs)
                grid_err = max(grid_err, float(np.max(np.abs(chained - exact))) / float(np.max(np.abs(exact))))
            result.add(f"kernel quadrature vs spectral T_t alpha=({label})", grid_err, SEMIGROUP_TOL,
                       grid_err <= SEMIGROUP_TOL)
    result.data['subordination_laguerre_max_error'] = laguerre_gap
    return result


# ---------------------------------------------------------------------------
# gv-identity


def _semigroups(config: RunConfig) -> List[str]:
    semigroup = str(config.option('semigroup', 'heat'))
    if semigroup == 'both':
        return ['heat', 'poisson']
    if semigroup not in ('heat', 'poisson'):
        raise UsageError(f"--semigroup must be heat, poisson or both, got {semigroup!r}")
    return [semigroup]


def _perp_to_ground(f: SpectralFunction) -> SpectralFunction:
    return f.filter(lambda m: sum(m) > 0)


def run_gv_identity(ctx: SuiteContext) -> SuiteResult:
    """||g_V^{eps,+} f|| = 2^{-d-1} ||f_eps^+||, the horizontal bracket and area/vertical comparability."""
    config = ctx.config
    result = SuiteResult('gv-identity')
    samples = int(config.option('samples', 20))
    d = config.d
    target = 2.0 ** (-d - 1)
    brackets: Dict[str, List[float]] = {}
    vertical: Dict[str, List[float]] = {}
    for ai, alpha in enumerate(config.alpha_vectors):
        label = _alpha_label(alpha)
        for ei, eps in enumerate(config.eps_vectors):
            family = []
            for s in range(samples):
                seed = ctx.seed + 1000 * ai + 100 * ei + s
                f = SpectralFunction.random(alpha, modes=5, max_length=8, seed=seed, eps=eps)
                if len(f.coeffs):
                    family.append(f)
            for semigroup in _semigroups(config):
                kind = SquareFnKind('gV', 0, semigroup, eps)
                grid = exact_grid(kind, alpha)
                ratios = ctx.evaluator.map(
                    lambda f: weighted_lp_ratio(kind, f, grid=grid, cfg=config.kernel), family,
                    desc=f"gV {semigroup} eps={eps}")
                observed = max(ratios, key=lambda r: abs(r - target))
                band = IDENTITY_TOL * target
                result.add(f"||g_V|| / ||f|| = 2^(-d-1) {semigroup} alpha=({label}) eps={eps}",
                           observed, target, abs(observed - target) <= band,
                           note=f"target {target:g} +- {band:.2g}")
                vertical[f"{semigroup} alpha=({label}) eps={eps}"] = [min(ratios), max(ratios)]

                for star in (False, True):
                    values = [horizontal_l2_aggregate(_perp_to_ground(f), eps, star, semigroup) for f in family
                              if len(_perp_to_ground(f).coeffs)]
                    if not values:
                        continue
                    key = f"{'gH*' if star else 'gH'} {semigroup} alpha=({label}) eps={eps}"
                    brackets[key] = [min(values), max(values)]
                    spread = max(values) / min(values)
                    result.add(f"horizontal aggregate bracket C/c {key}", spread, 10.0, spread <= 10.0)

            if d == 1:
                _area_comparability(ctx, result, alpha, eps, family[:3])
    result.data['vertical_ratios'] = vertical
    result.data['horizontal_brackets'] = brackets
    return result


def _area_comparability(ctx: SuiteContext, result: SuiteResult, alpha: AlphaVector, eps: EpsVector,
                        family: Sequence[SpectralFunction]) -> None:
    config = ctx.config
    points, wts = orthant_rule(alpha, 12)
    area_kind = SquareFnKind('SV', 0, 'heat', eps)
    vertical_kind = SquareFnKind('gV', 0, 'heat', eps)
    lower = 3.0 ** -(2 * alpha.total + alpha.d) * 2.0 ** -alpha.d
    upper = 2.0 ** alpha.d
    cone = ConeSpec(1.0, config.cone_points)
    for k, f in enumerate(family):
        area = np.array(ctx.evaluator.map(
            lambda p: area_integral(area_kind, f, p, cone, config.kernel).value, list(points),
            desc=f"S_V eps={eps}"))
        vertical = evaluate(vertical_kind, f, points, cfg=config.kernel)
        ratio = math.sqrt(float(np.sum(wts * area ** 2)) / float(np.sum(wts * vertical ** 2)))
        result.add(f"||S_V|| / ||g_V|| in bracket alpha=({_alpha_label(alpha)}) eps={eps} f{k}",
                   ratio, upper, lower * (1 - 1e-3) <= ratio <= upper * (1 + 1e-3),
                   note=f"bracket [{lower:.4g}, {upper:.4g}]")


# ---------------------------------------------------------------------------
# squarefn


def _function_from_options(config: RunConfig, alpha: AlphaVector, seed: int) -> SpectralFunction:
    path = config.option('function')
    if path:
        try:
            with open(str(path), 'r') as f:
                func = SpectralFunction.from_json(f.read())
        except OSError as e:
            raise UsageError(f"Cannot read function file {path}: {e}") from e
        if func.d != alpha.d:
            raise UsageError(f"function file has d={func.d}, expected {alpha.d}")
        return SpectralFunction(alpha, func.coeffs)
    return SpectralFunction.random(alpha, modes=5, max_length=6, seed=seed)


def run_squarefn(ctx: SuiteContext) -> SuiteResult:
    """Evaluate one square function along a line and tabulate it."""
    config = ctx.config
    result = SuiteResult('squarefn')
    eps = EpsVector(config.eps) if config.eps is not None else None
    semigroup = str(config.option('semigroup', 'heat'))
    kind = SquareFnKind(str(config.option('kind', 'gV')), int(config.option('j', 0)), semigroup, eps)
    if kind.j >= config.d:
        raise UsageError(f"j={kind.j + 1} exceeds d={config.d}")
    count = int(config.option('points', 40))
    if kind.fullspace:
        line = np.linspace(-3.0, 3.0, count)
    else:
        line = np.linspace(0.05, 3.0, count)
    points = np.repeat(line[:, None], config.d, axis=1)
    rows = []
    series = {}
    for idx, alpha in enumerate(config.alpha_vectors):
        f = _function_from_options(config, alpha, ctx.seed + idx)
        if kind.is_area:
            values = ctx.evaluator.map(
                lambda p: area_integral(kind, f, p, config.cone, config.kernel), list(points),
                desc=f"{kind.label} alpha=({_alpha_label(alpha)})")
        else:
            value = g_function(kind, f, points, config.kernel)
            values = [dataclasses.replace(value, value=float(v), error_estimate=float(value.error_estimate))
                      for v in np.atleast_1d(value.value)]
        for x, v in zip(line, values):
            rows.append({
                'alpha': _alpha_label(alpha),
                'x': format_value(x),
                'kind': kind.operator if kind.operator in ('gV', 'SV') else f"{kind.operator}{kind.j + 1}",
                'semigroup': kind.semigroup,
                'variant': 'full' if kind.fullspace else f"eps{kind.eps}+",
                'value': format_value(v.value),
                'error_estimate': format_value(v.error_estimate),
            })
        series[f"alpha=({_alpha_label(alpha)})"] = [(float(x), float(v.value)) for x, v in zip(line, values)]
        finite = all(math.isfinite(v.value) and v.value >= 0 for v in values)
        result.add(f"{kind.label} finite and nonnegative alpha=({_alpha_label(alpha)})", float(finite), 1.0, finite)
    ctx.tables['squarefn.csv'] = rows
    ctx.plots['squarefn.svg'] = {
        'series': series, 'title': kind.label, 'xlabel': 'x (along the diagonal)', 'ylabel': 'value',
    }
    result.data['kind'] = kind.label
    result.data['points'] = count
    return result


# ---------------------------------------------------------------------------
# reduce


def _reduction_points(d: int) -> np.ndarray:
    if d == 1:
        return np.geomspace(0.05, 3.0, 50)[:, None]
    axis = np.geomspace(0.1, 2.5, 5 if d == 2 else 3)
    return np.array(list(itertools.product(axis, repeat=d)))


def run_reduce(ctx: SuiteContext) -> SuiteResult:
    """The reduction chain S_H^j f <= sum_eps calS f_eps <= 2^{3d/2} sum_eps S_H^{j,eps,+} f_eps^+."""
    config = ctx.config
    result = SuiteResult('reduce')
    points = _reduction_points(config.d)
    probe = np.vstack([points, -points[:3]])
    for idx, alpha in enumerate(config.alpha_vectors):
        label = _alpha_label(alpha)
        f = SpectralFunction.random(alpha, modes=3, max_length=4, seed=ctx.seed + idx)

        split = decomposition_defect(f, config.d, probe)
        result.add(f"f = sum_eps f_eps alpha=({label})", split, 1e-12, split <= 1e-12)

        bridge = 0.0
        for eps in config.eps_vectors:
            for m in [m for m in f.coeffs if MultiIndex(m).in_parity(eps)]:
                full, plus = inner_product_bridge(f, m, eps)
                bridge = max(bridge, abs(full - plus))
            for j in range(config.d):
                defect = symmetry_defect(f, j, eps, probe, 0.5)
                result.add(f"delta_j T_t^eps symmetry j={j + 1} alpha=({label}) eps={eps}", defect, 1e-10,
                           defect <= 1e-10)
        result.add(f"<f_eps, h_m> = 2^d <f_eps^+, h_m>_+ alpha=({label})", bridge, 1e-10, bridge <= 1e-10)

        for p in (1.5, 2.0, 3.0):
            ratio = norm_equivalence_ratio(f, alpha, p)
            lower, upper = 2.0 ** (config.d / p - config.d), 2.0 ** (config.d / p)
            result.add(f"L^{p:g} norm equivalence alpha=({label})", ratio, upper,
                       lower * (1 - 1e-9) <= ratio <= upper * (1 + 1e-9), note=f"bracket [{lower:.4g}, {upper:.4g}]")

        for j in range(config.d):
            report = reduction_verify(f, j, points, config.cone, config.kernel, REDUCTION_SLACK)
            result.add(f"reduction chain j={j + 1} alpha=({label})", report.max_ratio, 1.0 + REDUCTION_SLACK,
                       report.passed, note='; '.join(report.violations[:3]))
            result.data[f"reduction j={j + 1} alpha=({label})"] = {
                'constant': report.constant,
                'weak_constant': report.weak_constant,
                'max_ratio': report.max_ratio,
                'points': len(report.rows),
            }
    return result


# ---------------------------------------------------------------------------
# cz-audit


def run_cz_audit(ctx: SuiteContext) -> SuiteResult:
    config = ctx.config
    rows: List[Dict] = []
    cache_file = os.path.join(config.out, AUDIT_CACHE_FILE)
    os.makedirs(config.out, exist_ok=True)
    with AuditCache(config_hash(config.to_dict()), cache_file) as cache:
        result = audit_suite(config, cache, ctx.evaluator, rows)
    ctx.tables['cz_audit.csv'] = rows
    series = {}
    for audit in result.audits:
        if audit.audit != 'growth':
            continue
        series[f"{audit.family} {audit.note.split(';')[0]}"] = [(lv.k, lv.constant) for lv in audit.levels]
    ctx.plots['cz_audit.svg'] = {
        'series': series, 'title': 'growth constants by level', 'xlabel': 'level k', 'ylabel': 'C_k',
        'logy': True,
    }
    return result


# ---------------------------------------------------------------------------
# ap


def power_weight(gamma: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    """U(x) = prod |x_i|^{gamma_i}."""
    gamma = np.asarray(gamma, dtype=float)

    def weight(x):
        return np.prod(np.abs(np.asarray(x, dtype=float)) ** gamma, axis=-1)

    return weight


def run_ap(ctx: SuiteContext) -> SuiteResult:
    """Empirical A_p constants of power weights over nested dyadic ball families."""
    config = ctx.config
    result = SuiteResult('ap')
    base = dyadic_ball_family(config.d, centers=6, min_exp=-8, max_exp=3)
    refined = dyadic_ball_family(config.d, centers=11, min_exp=-10, max_exp=4)
    constants: Dict[str, Dict[str, float]] = {}
    for alpha in config.alpha_vectors:
        label = _alpha_label(alpha)
        doubling = doubling_constant(alpha, base)
        bound = 2.0 ** (2 * alpha.total + 2 * config.d) * 4.0
        result.add(f"doubling constant alpha=({label})", doubling, bound, math.isfinite(doubling) and doubling <= bound)
        cone_axis = np.array([0.0, 0.25, 1.0, 4.0])
        cone_fine = np.array([0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
        coarse_cone = phi_alpha_log_bound(alpha, grid_points([cone_axis] * config.d).reshape(-1, config.d),
                                          2.0 ** np.arange(-6, 4), config.cone)
        fine_cone = phi_alpha_log_bound(alpha, grid_points([cone_fine] * config.d).reshape(-1, config.d),
                                        2.0 ** np.arange(-8.0, 4.5, 0.5), config.cone)
        constants[f"cone weight alpha=({label})"] = {'coarse': coarse_cone, 'refined': fine_cone}
        result.add(f"cone weight times log((1+zeta)/(1-zeta))^(d/2) bounded alpha=({label})",
                   fine_cone / coarse_cone, REFINEMENT_RATIO,
                   math.isfinite(fine_cone) and fine_cone <= REFINEMENT_RATIO * coarse_cone,
                   note=f"sup {fine_cone:.4g} on the refined grid")
        for p in (1.5, 2.0, 3.0):
            dims = np.array([2 * a + 2 for a in alpha])
            cases = {
                'inside-low': -0.5 * dims,
                'inside-high': 0.5 * dims * (p - 1.0),
                'outside': dims * (p - 1.0) + 1.0,
            }
            for name, gamma in cases.items():
                weight = power_weight(gamma)
                coarse = ap_constant(weight, p, alpha, base)
                fine = ap_constant(weight, p, alpha, refined)
                key = f"p={p:g} {name} alpha=({label})"
                constants[key] = {'coarse': coarse, 'refined': fine, 'gamma': list(gamma)}
                if name == 'outside':
                    continue
                drift = abs(fine / coarse - 1.0)
                result.add(f"A_p constant stable under refinement {key}", drift, 0.1, drift <= 0.1)
    result.data['ap_constants'] = constants
    return result


# ---------------------------------------------------------------------------
# lp-probe


def run_lp_probe(ctx: SuiteContext) -> SuiteResult:
    """Weighted L^p ratios and weak (1,1) level-set probes on random and spike families."""
    config = ctx.config
    result = SuiteResult('lp-probe')
    samples = int(config.option('samples', 20))
    semigroup = str(config.option('semigroup', 'heat'))
    probes: Dict[str, object] = {}
    for ai, alpha in enumerate(config.alpha_vectors):
        label = _alpha_label(alpha)
        for ei, eps in enumerate(config.eps_vectors):
            kind = SquareFnKind(str(config.option('kind', 'gV')), int(config.option('j', 0)), semigroup, eps)
            if kind.is_area:
                raise UsageError("lp-probe supports g-functions only")
            family = [SpectralFunction.random(alpha, modes=8, max_length=8, seed=ctx.seed + 1000 * ai + 100 * ei + s,
                                              eps=eps) for s in range(samples)]
            family = [f for f in family if len(f.coeffs)]
            weight = power_weight([0.25] * config.d)
            coarse_grid = box_rule(alpha, 32, 6.0)
            fine_grid = box_rule(alpha, 48, 7.0)
            for p in (1.5, 3.0):
                coarse = ctx.evaluator.map(
                    lambda f: weighted_lp_ratio(kind, f, weight, p, coarse_grid, cfg=config.kernel), family,
                    desc=f"L^{p:g} {kind.label}")
                fine = ctx.evaluator.map(
                    lambda f: weighted_lp_ratio(kind, f, weight, p, fine_grid, cfg=config.kernel), family,
                    desc=f"L^{p:g} {kind.label} refined")
                drift = abs(max(fine) / max(coarse) - 1.0)
                key = f"{kind.label} p={p:g} alpha=({label})"
                result.add(f"max L^p ratio stable under grid refinement {key}", drift, 0.1, drift <= 0.1)
                probes[key] = {'max': max(coarse), 'min': min(coarse)}

            f = family[0]
            scaled = f.scale(3.0)
            homogeneity = abs(weighted_lp_ratio(kind, scaled, weight, 2.0, coarse_grid, cfg=config.kernel)
                              / weighted_lp_ratio(kind, f, weight, 2.0, coarse_grid, cfg=config.kernel) - 1.0)
            result.add(f"L^p ratio homogeneous of degree 0 {kind.label} alpha=({label})", homogeneity, 1e-10,
                       homogeneity <= 1e-10)

            weak = [weak11_probe(kind, f, weight, grid=coarse_grid, cfg=config.kernel).constant for f in family[:5]]
            spikes = []
            for n in (4, 8, 12):
                spike = SpectralFunction.spike(alpha, [1.0] * config.d, n)
                spike = spike.filter(lambda m: MultiIndex(m).in_parity(eps))
                if len(spike.coeffs):
                    spikes.append(weak11_probe(kind, spike, weight, grid=coarse_grid, cfg=config.kernel).constant)
            probes[f"{kind.label} weak(1,1) alpha=({label})"] = {'random': weak, 'spike': spikes}
    result.data['probes'] = probes
    return result


SUITES: Dict[str, Callable[[SuiteContext], SuiteResult]] = {
    'ortho': run_ortho,
    'kernel-xcheck': run_kernel_xcheck,
    'semigroup': run_semigroup,
    'gv-identity': run_gv_identity,
    'squarefn': run_squarefn,
    'reduce': run_reduce,
    'cz-audit': run_cz_audit,
    'ap': run_ap,
    'lp-probe': run_lp_probe,
}


def run_suite(name: str, ctx: SuiteContext) -> SuiteResult:
    """Run a suite by name, logging its verdict."""
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    logger.info(f"Running suite {name}")
    result = SUITES[name](ctx)
    failed = [c for c in result.checks if not c.passed]
    for check in failed:
        logger.warning(f"FAILED {check.name}: {check.value:.6g} (threshold {check.threshold:.6g}) {check.note}")
    logger.info(f"Suite {name}: {len(result.checks) - len(failed)}/{len(result.checks)} checks passed, "
                f"{len(result.audits)} audits ({'PASS' if result.passed else 'FAIL'})")
    return result
