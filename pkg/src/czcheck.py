"""Numerical audit of the standard (Calderon-Zygmund) kernel estimates.

Growth:      ||K(x,y)||_B * w^+(B(x,|x-y|))                                  bounded
Smoothness:  ||K(x,y) - K(x',y)||_B * w^+(B(x,|x-y|)) / (|x-x'|/|x-y|)^delta  bounded (same in y)

"Bounded" is checked as refinement stability: the empirical constant C_k over
nested grids may grow by at most REFINEMENT_RATIO per level.  A stronger
exponent than the true one must make C_k blow up, which is the negative control.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.batch import BatchEvaluator
from src.cache import AuditCache
from src.config import NEGATIVE_CONTROL_DELTA, NEGATIVE_CONTROL_GROWTH, REFINEMENT_RATIO, logger
from src.kernel import KernelFamily, banach_norm
from src.measure import ball_measure, v_plus_cube
from src.models import (
    AlphaVector, AuditLevel, BallSpec, ConeSpec, EpsVector, EstimateAudit, KernelEvalConfig,
    ParameterDomainError, PreconditionError, RunConfig, SuiteResult,
)
from src.utils import format_value

AUDITS = ('growth', 'x', 'y')


@dataclass(frozen=True)
class FamilySpec:
    name: str
    derivative: str
    space: str
    delta: float
    laguerre: str = ''


FAMILIES: Dict[str, FamilySpec] = {
    'gV': FamilySpec('gV', 't', 'tdt', 1.0),
    'gH': FamilySpec('gH', 'delta', 'dt', 1.0),
    'gHstar': FamilySpec('gHstar', 'delta_star', 'dt', 1.0),
    'SV': FamilySpec('SV', 't', 'A_tdt', 0.5),
    'SH': FamilySpec('SH', 'delta', 'A_dt', 0.5),
    'SHstar': FamilySpec('SHstar', 'delta_star', 'A_dt', 0.5),
    'SVT': FamilySpec('SVT', 't', 'A_tdt', 0.5, 'T'),
    'SHT': FamilySpec('SHT', 'delta', 'A_dt', 0.5, 'T'),
    'SHTtilde': FamilySpec('SHTtilde', 'delta', 'A_dt', 0.5, 'Ttilde'),
}


def family_kernels(name: str, alpha: AlphaVector, eps: Optional[EpsVector] = None) -> List[Tuple[str, KernelFamily]]:
    """Concrete kernel families for one table entry; eps is ignored by the Laguerre entries."""
    if name not in FAMILIES:
        raise ParameterDomainError(f"unknown kernel family {name!r}")
    spec = FAMILIES[name]
    d = alpha.d
    coords = [0] if spec.derivative == 't' else list(range(d))
    if spec.laguerre == 'T':
        zero = EpsVector.zero(d)
        return [(f"{name}[j={j + 1}]" if spec.derivative != 't' else name,
                 KernelFamily(spec.derivative, alpha, zero, j, 2.0 ** d)) for j in coords]
    if spec.laguerre == 'Ttilde':
        out = []
        for j, i in itertools.product(range(d), repeat=2):
            derivative = 'delta_star' if i == j else 'delta'
            out.append((f"{name}[j={j + 1},i={i + 1}]",
                        KernelFamily(derivative, alpha, EpsVector.unit(d, j), i, 2.0 ** d, 2.0)))
        return out
    if eps is None:
        raise ParameterDomainError(f"family {name} needs an eps component")
    suffix = '' if spec.derivative == 't' else '[j={}]'
    return [((f"{name}{suffix.format(j + 1)}" if suffix else name) + f"/eps{eps}",
             KernelFamily(spec.derivative, alpha, eps, j)) for j in coords]


def _directions(d: int) -> List[np.ndarray]:
    diag = np.ones(d) / math.sqrt(d)
    if d == 1:
        return [diag]
    tilted = np.array([1.0] + [0.5] * (d - 1))
    return [diag, tilted / np.linalg.norm(tilted)]


@dataclass
class TripleGrid:
    """Nested sample sets for one refinement level k >= 1.

    Base points have |x| on 2^k + 1 log-spaced values in [2^-3, 8]; separations
    are 2^j for j in [-(k+1), k-1]; smoothness offsets are r |x-y| with
    r in {2^-2, 2^-5, ..., 2^-(3k-1)}.
    """

    level: int
    pairs: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    x_triples: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=list)
    y_triples: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=list)

    @classmethod
    def build(cls, d: int, level: int) -> 'TripleGrid':
        if level < 1:
            raise ParameterDomainError("grid level must be >= 1")
        grid = cls(level)
        radii = np.geomspace(2.0 ** -3, 8.0, 2 ** level + 1)
        separations = [2.0 ** j for j in range(-(level + 1), level)]
        ratios = [2.0 ** -(3 * i - 1) for i in range(1, level + 1)]
        directions = _directions(d)
        for index, b in enumerate(radii):
            x = b * directions[0]
            for s, u, sign in itertools.product(separations, directions, (1.0, -1.0)):
                y = x + sign * s * u
                if np.any(y < 0):
                    continue
                grid.pairs.append((x, y))
                if index % 2:
                    continue
                for r, v, sign2 in itertools.product(ratios, directions, (1.0, -1.0)):
                    offset = sign2 * r * s * v
                    if np.all(x + offset >= 0):
                        grid.x_triples.append((x, x + offset, y))
                    if np.all(y + offset >= 0):
                        grid.y_triples.append((x, y, y + offset))
        grid.validate()
        return grid

    def validate(self) -> None:
        for x, y in self.pairs:
            if np.allclose(x, y):
                raise PreconditionError(f"degenerate pair x = y = {x}")
        for x, xp, y in self.x_triples:
            if not np.linalg.norm(x - y) > 2.0 * np.linalg.norm(x - xp):
                raise PreconditionError(f"triple violates |x-y| > 2|x-x'| at x={x}")
        for x, y, yp in self.y_triples:
            if not np.linalg.norm(x - y) > 2.0 * np.linalg.norm(y - yp):
                raise PreconditionError(f"triple violates |x-y| > 2|y-y'| at x={x}")

    def samples(self, audit: str):
        if audit == 'growth':
            return [(x, None, y, None) for x, y in self.pairs]
        if audit == 'x':
            return [(x, xp, y, None) for x, xp, y in self.x_triples]
        if audit == 'y':
            return [(x, None, y, yp) for x, y, yp in self.y_triples]
        raise ParameterDomainError(f"unknown audit {audit!r}")


def build_grids(d: int, levels: int) -> List[TripleGrid]:
    return [TripleGrid.build(d, k) for k in range(1, levels + 1)]


@dataclass
class AuditSamples:
    """Raw per-sample quantities of one audit level; constants for any delta follow from them."""

    level: int
    norms: np.ndarray
    measures: np.ndarray
    cubes: np.ndarray
    ratios: np.ndarray
    separations: np.ndarray
    points: List[Tuple] = field(default_factory=list)

    def contributions(self, delta: float) -> Tuple[np.ndarray, np.ndarray]:
        scale = np.power(self.ratios, delta)
        return self.norms * self.measures / scale, self.norms * self.cubes / scale

    def constants(self, delta: float) -> Tuple[float, float]:
        if len(self.norms) == 0:
            return 0.0, 0.0
        main, cube = self.contributions(delta)
        return float(np.max(main)), float(np.max(cube))

    def to_dict(self) -> Dict:
        return {
            'level': self.level,
            'norms': self.norms.tolist(),
            'measures': self.measures.tolist(),
            'cubes': self.cubes.tolist(),
            'ratios': self.ratios.tolist(),
            'separations': self.separations.tolist(),
            'points': [[None if p is None else np.asarray(p).tolist() for p in point] for point in self.points],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'AuditSamples':
        points = [tuple(None if p is None else np.asarray(p, dtype=float) for p in point)
                  for point in data.get('points', [])]
        return cls(int(data['level']), *(np.asarray(data[k], dtype=float)
                                          for k in ('norms', 'measures', 'cubes', 'ratios', 'separations')),
                   points=points)


def _sample_value(family: KernelFamily, space: str, cone: ConeSpec, cfg: KernelEvalConfig, sample):
    x, xp, y, yp = sample
    separation = float(np.linalg.norm(x - y))
    if xp is None and yp is None:
        norm = banach_norm(family, x, y, space, cone, cfg).value
        ratio = 1.0
    else:
        norm = banach_norm(family, x, y, space, cone, cfg, x_other=xp, y_other=yp).value
        moved = xp - x if xp is not None else yp - y
        ratio = float(np.linalg.norm(moved)) / separation
    measure = ball_measure(BallSpec(tuple(x), separation), family.alpha).value
    cube = float(v_plus_cube(x, separation, family.alpha))
    return norm, measure, cube, ratio, separation


def collect_samples(family: KernelFamily, space: str, audit: str, grid: TripleGrid,
                    cone: ConeSpec = ConeSpec(), cfg: KernelEvalConfig = KernelEvalConfig(),
                    evaluator: Optional[BatchEvaluator] = None, desc: str = '') -> AuditSamples:
    samples = grid.samples(audit)
    evaluator = evaluator or BatchEvaluator(progress=False)
    values = evaluator.map(lambda s: _sample_value(family, space, cone, cfg, s), samples,
                           desc=desc or f"{audit} level {grid.level}")
    arr = np.array(values, dtype=float).reshape(-1, 5)
    return AuditSamples(grid.level, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4], samples)


def build_audit(name: str, space: str, audit: str, delta: Optional[float], levels: Sequence[AuditSamples],
                expect_failure: bool = False, note: str = '') -> EstimateAudit:
    """Constants per level and the refinement-stability verdict."""
    result = EstimateAudit(name, space, audit, delta, expect_failure=expect_failure, note=note)
    exponent = 0.0 if delta is None else delta
    for samples in levels:
        constant, cube = samples.constants(exponent)
        result.levels.append(AuditLevel(samples.level, constant, cube, len(samples.norms)))
    constants = [lv.constant for lv in result.levels]
    finite = all(np.isfinite(c) and c > 0 for c in constants)
    for prev, lv in zip(result.levels, result.levels[1:]):
        lv.passed = finite and lv.constant <= REFINEMENT_RATIO * prev.constant
    if result.levels and not finite:
        result.levels[0].passed = False
    result.passed = finite and len(constants) >= 2 and all(lv.passed for lv in result.levels)
    return result


def growth_audit(name: str, family: KernelFamily, space: str, grids: Sequence[TripleGrid],
                 cone: ConeSpec = ConeSpec(), cfg: KernelEvalConfig = KernelEvalConfig(),
                 evaluator: Optional[BatchEvaluator] = None) -> EstimateAudit:
    levels = [collect_samples(family, space, 'growth', g, cone, cfg, evaluator) for g in grids]
    return build_audit(name, space, 'growth', None, levels)


def smoothness_audit(name: str, family: KernelFamily, space: str, which: str, delta: float,
                     grids: Sequence[TripleGrid], cone: ConeSpec = ConeSpec(),
                     cfg: KernelEvalConfig = KernelEvalConfig(),
                     evaluator: Optional[BatchEvaluator] = None, expect_failure: bool = False) -> EstimateAudit:
    if which not in ('x', 'y'):
        raise ParameterDomainError(f"smoothness audit is 'x' or 'y', got {which!r}")
    levels = [collect_samples(family, space, which, g, cone, cfg, evaluator) for g in grids]
    return build_audit(name, space, which, delta, levels, expect_failure)


def growth_by_scale(samples: AuditSamples) -> Dict[str, float]:
    """Max growth contribution per separation (the scale probe)."""
    out: Dict[str, float] = {}
    main, _ = samples.contributions(0.0)
    for s, c in zip(samples.separations, main):
        key = f"{s:.6g}"
        out[key] = max(out.get(key, 0.0), float(c))
    return out


def sample_rows(name: str, space: str, audit: str, samples: AuditSamples, delta: float) -> List[Dict]:
    """CSV rows of per-sample contributions."""
    main, cube = samples.contributions(delta)
    rows = []
    for (x, xp, y, yp), sep, c, cc in zip(samples.points, samples.separations, main, cube):
        rows.append({
            'family': name,
            'space': space,
            'audit': audit,
            'level': samples.level,
            'x': ' '.join(format_value(v) for v in x),
            'x_prime': '' if xp is None else ' '.join(format_value(v) for v in xp),
            'y': ' '.join(format_value(v) for v in y),
            'y_prime': '' if yp is None else ' '.join(format_value(v) for v in yp),
            'separation': format_value(sep),
            'contribution': format_value(c),
            'contribution_cube': format_value(cc),
        })
    return rows


def _audit_key(name: str, alpha: AlphaVector, audit: str, delta: Optional[float], levels: int) -> str:
    return f"{name}|alpha={','.join(f'{a:g}' for a in alpha)}|{audit}|delta={delta}|levels={levels}"


def audit_suite(config: RunConfig, cache: Optional[AuditCache] = None,
                evaluator: Optional[BatchEvaluator] = None,
                rows: Optional[List[Dict]] = None) -> SuiteResult:
    """Growth and both smoothness audits for the selected families, alphas and eps components.

    Options: ``family`` (comma list, default all nine), ``delta`` (override of
    the smoothness exponent), ``negative_control`` (default on).
    """
    result = SuiteResult('cz-audit')
    names = [n.strip() for n in str(config.option('family', ','.join(FAMILIES))).split(',') if n.strip()]
    for n in names:
        if n not in FAMILIES:
            raise ParameterDomainError(f"unknown kernel family {n!r}")
    grids = build_grids(config.d, config.level)
    cone = config.cone
    cfg = config.kernel
    evaluator = evaluator or BatchEvaluator(config.threads, progress=False)
    delta_override = config.option('delta')
    scales: Dict[str, Dict[str, float]] = {}

    for alpha in config.alpha_vectors:
        for name in names:
            spec = FAMILIES[name]
            eps_list = [None] if spec.laguerre else config.eps_vectors
            delta = float(delta_override) if delta_override is not None else spec.delta
            for eps in eps_list:
                for label, family in family_kernels(name, alpha, eps):
                    logger.info(f"Auditing {label} in {spec.space}, alpha={alpha.entries}")
                    for audit in AUDITS:
                        exponent = None if audit == 'growth' else delta
                        key = _audit_key(label, alpha, audit, exponent, config.level)
                        stored = cache.get_samples(key) if cache is not None else None
                        if stored is not None:
                            levels = [AuditSamples.from_dict(s) for s in stored]
                            logger.info(f"  {audit}: reusing cached samples")
                        else:
                            levels = [collect_samples(family, spec.space, audit, g, cone, cfg, evaluator,
                                                      desc=f"{label} {audit} k={g.level}") for g in grids]
                        record = build_audit(label, spec.space, audit, exponent, levels,
                                             note=f"alpha={list(alpha.entries)}; diagonal cut 2^-{config.level + 1}")
                        result.audits.append(record)
                        logger.info(f"  {audit}: C_k = {[f'{lv.constant:.4g}' for lv in record.levels]} "
                                    f"({'PASS' if record.passed else 'FAIL'})")
                        if cache is not None and stored is None:
                            cache.set(key, record, [s.to_dict() for s in levels])
                        if rows is not None:
                            for samples in levels:
                                rows.extend(sample_rows(label, spec.space, audit, samples, exponent or 0.0))
                        if audit == 'growth':
                            scales[f"{label}|{alpha.entries}"] = growth_by_scale(levels[-1])
                        elif audit == 'x' and record.passed:
                            # any weaker exponent must pass as well
                            weaker = build_audit(label, spec.space, audit, delta / 2.0, levels)
                            result.add(f"{label} weaker exponent {delta / 2:g}", float(weaker.passed), 1.0,
                                       weaker.passed, note=f"alpha={list(alpha.entries)}")

    if config.option('negative_control', True) and any(FAMILIES[n].delta == 1.0 for n in names):
        _negative_control(config, names, grids, cone, cfg, evaluator, result)
    result.data['growth_by_scale'] = scales
    result.data['diagonal_cut'] = 2.0 ** -(config.level + 1)
    return result


def _negative_control(config: RunConfig, names: Sequence[str], grids, cone, cfg, evaluator, result: SuiteResult):
    name = next(n for n in names if FAMILIES[n].delta == 1.0)
    spec = FAMILIES[name]
    alpha = config.alpha_vectors[0]
    eps = config.eps_vectors[0]
    label, family = family_kernels(name, alpha, eps)[0]
    levels = [collect_samples(family, spec.space, 'x', g, cone, cfg, evaluator) for g in grids]
    record = build_audit(label, spec.space, 'x', NEGATIVE_CONTROL_DELTA, levels, expect_failure=True,
                         note='negative control: exponent above the true one')
    result.audits.append(record)
    growth = min((b.constant / a.constant for a, b in zip(record.levels, record.levels[1:])), default=0.0)
    result.add(f"{label} negative control growth per level", growth, NEGATIVE_CONTROL_GROWTH,
               growth >= NEGATIVE_CONTROL_GROWTH)
    logger.info(f"Negative control {label} at delta={NEGATIVE_CONTROL_DELTA}: min growth {growth:.3g}")
