"""eps-symmetric decomposition, orthant restriction/extension and the reduction inequality."""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config import REDUCTION_SLACK, logger
from src.measure import box_rule, full_rule, orthant_rule
from src.models import (
    AlphaVector, ConeSpec, EpsVector, KernelEvalConfig, MultiIndex, ParameterDomainError,
    PreconditionError, SquareFnKind,
)
from src.operators import SpectralFunction, sign_power
from src.squarefn import FieldSpec, area_integral, component_area_integral, semigroup_field


@dataclass(frozen=True)
class ReflectionSignature:
    """eta in {-1, 1}^d acting by x -> eta x."""

    eta: Tuple[int, ...]

    def __post_init__(self):
        eta = tuple(int(e) for e in self.eta)
        if not eta or any(e not in (-1, 1) for e in eta):
            raise ParameterDomainError(f"reflection entries must be +-1, got {self.eta}")
        object.__setattr__(self, 'eta', eta)

    @staticmethod
    def all(d: int) -> Iterator['ReflectionSignature']:
        for eta in itertools.product((1, -1), repeat=d):
            yield ReflectionSignature(eta)

    @classmethod
    def sigma(cls, d: int, j: int) -> 'ReflectionSignature':
        return cls(tuple(-1 if i == j else 1 for i in range(d)))

    def power(self, eps: EpsVector) -> int:
        """eta^eps = prod eta_i^{eps_i}."""
        return int(np.prod([e if k else 1 for e, k in zip(self.eta, eps)]))

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) * np.array(self.eta, dtype=float)


@dataclass(frozen=True)
class ProjectedFunction:
    """f_eps(x) = 2^-d sum_eta eta^eps f(eta x)."""

    f: Callable
    eps: EpsVector

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for eta in ReflectionSignature.all(self.eps.d):
            total = total + eta.power(self.eps) * self.f(eta.apply(x))
        return total / 2 ** self.eps.d


@dataclass(frozen=True)
class RestrictedFunction:
    """f^+: f on the closed positive orthant."""

    f: Callable

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise PreconditionError("restricted function evaluated outside R^d_+")
        return self.f(x)


@dataclass(frozen=True)
class ExtendedFunction:
    """eps-symmetric extension of f^+: f(eta x) = eta^eps f^+(x)."""

    f_plus: Callable
    eps: EpsVector

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        signs = np.where(x < 0, -1.0, 1.0)
        return sign_power(signs, self.eps) * self.f_plus(np.abs(x))


def eps_project(f, eps: EpsVector):
    """The eps-symmetric component; exact coefficient filter for spectral f."""
    if isinstance(f, SpectralFunction):
        if eps.d != f.d:
            raise ParameterDomainError("eps and f dimensions differ")
        return f.filter(lambda m: MultiIndex(m).in_parity(eps))
    return ProjectedFunction(f, eps)


def restrict_plus(f) -> RestrictedFunction:
    return RestrictedFunction(f)


def extend_eps(f_plus, eps: EpsVector) -> ExtendedFunction:
    return ExtendedFunction(f_plus, eps)


def decomposition_defect(f: Callable, d: int, points) -> float:
    """max |sum_eps f_eps - f| on ``points``."""
    points = np.asarray(points, dtype=float)
    total = sum(ProjectedFunction(f, e)(points) for e in EpsVector.all(d))
    return float(np.max(np.abs(total - f(points))))


def inner_product_bridge(f: SpectralFunction, m: Sequence[int], eps: EpsVector,
                         nodes: int = 24) -> Tuple[float, float]:
    """(<f_eps, h_m>_{dw}, 2^d <f_eps^+, h_m>_{dw^+}) by quadrature; equal for m in N_eps."""
    f_eps = eps_project(f, eps)
    h_m = SpectralFunction.basis(f.alpha, m)
    y, w = full_rule(f.alpha, nodes)
    full = float(np.sum(w * f_eps(y) * h_m(y)))
    y, w = orthant_rule(f.alpha, nodes)
    plus = float(np.sum(w * f_eps(y) * h_m(y)))
    return full, 2 ** f.d * plus


def norm_equivalence_ratio(f: Callable, alpha: AlphaVector, p: float = 2.0,
                           weight: Optional[Callable] = None, n: int = 32, radius: float = 6.0) -> float:
    """||f||_{L^p(W dw)} / sum_eps ||f_eps^+||_{L^p(W^+ dw^+)} on Gauss-Legendre boxes (W symmetric)."""
    points, wts = box_rule(alpha, n, radius, full=True)
    if weight is not None:
        wts = wts * weight(points)
    whole = np.sum(wts * np.abs(f(points)) ** p) ** (1.0 / p)
    points, wts = box_rule(alpha, n, radius)
    if weight is not None:
        wts = wts * weight(points)
    parts = sum(np.sum(wts * np.abs(ProjectedFunction(f, e)(points)) ** p) ** (1.0 / p)
                for e in EpsVector.all(alpha.d))
    return float(whole / parts)


def symmetry_defect(f: SpectralFunction, j: int, eps: EpsVector, points, t: float) -> float:
    """max over sigma_k of | |delta_j T_t^eps f_eps|(sigma_k x) - |delta_j T_t^eps f_eps|(x) |."""
    spec = FieldSpec('delta', j, eps, False)
    points = np.asarray(points, dtype=float)
    base = np.abs(semigroup_field(spec, f, points, t))
    worst = 0.0
    for k in range(f.d):
        mirrored = ReflectionSignature.sigma(f.d, k).apply(points)
        worst = max(worst, float(np.max(np.abs(np.abs(semigroup_field(spec, f, mirrored, t)) - base))))
    return worst


@dataclass
class ReductionRow:
    x: Tuple[float, ...]
    lhs: float
    components: List[float]
    bounds: List[float]

    @property
    def middle(self) -> float:
        return float(sum(self.components))

    @property
    def rhs(self) -> float:
        return float(sum(self.bounds))

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0


@dataclass
class ReductionReport:
    j: int
    constant: float
    weak_constant: float
    slack: float
    rows: List[ReductionRow] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)


def _exceeds(small: float, big: float, slack: float) -> bool:
    return small > big * (1.0 + slack) + 1e-14


def reduction_verify(f: SpectralFunction, j: int, points, cone: ConeSpec = ConeSpec(),
                     cfg: KernelEvalConfig = KernelEvalConfig(), slack: float = REDUCTION_SLACK) -> ReductionReport:
    """Check S_H^j(f)(x) <= sum_eps calS_H^{j,eps} f_eps(x) and calS_H^{j,eps} f_eps(x) <= 2^{3d/2} S_H^{j,eps,+}(f_eps^+)(x).

    Points must lie in the open positive orthant (the coordinate hyperplanes are excluded).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(points <= 0):
        raise PreconditionError("reduction points must avoid the coordinate hyperplanes")
    d = f.d
    constant = 2.0 ** (1.5 * d)
    report = ReductionReport(j, constant, 2.0 ** (-2.5 * d), slack)
    full_kind = SquareFnKind('SH', j)
    for x in points:
        lhs = area_integral(full_kind, f, x, cone, cfg).value
        components, bounds = [], []
        for eps in EpsVector.all(d):
            part = component_area_integral(full_kind, f, x, eps, cone, cfg).value
            plus = area_integral(SquareFnKind('SH', j, 'heat', eps), f, x, cone, cfg).value
            components.append(part)
            bounds.append(constant * plus)
            if _exceeds(part, constant * plus, slack):
                report.violations.append(f"x={tuple(x)} eps={eps}: {part:.6e} > {constant * plus:.6e}")
        row = ReductionRow(tuple(float(v) for v in x), lhs, components, bounds)
        if _exceeds(lhs, row.middle, slack):
            report.violations.append(f"x={row.x}: S_H {lhs:.6e} > sum of components {row.middle:.6e}")
        report.rows.append(row)
        logger.debug(f"reduction x={row.x} lhs={lhs:.4e} middle={row.middle:.4e} rhs={row.rhs:.4e}")
    for v in report.violations:
        logger.warning(v)
    return report
