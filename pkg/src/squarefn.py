"""Square functions: vertical/horizontal g-functions, Lusin area integrals and their variants.

A square function is a t-norm of a derivative field D S_t f(x), S_t the heat
or Poisson semigroup.  For a SpectralFunction the field is a finite sum of
exponentials sum_k a_k(x) e^{-r_k t}, so every g-function has the closed form

    int |sum a_k e^{-r_k t}|^2 t^w dt = sum_{k,l} a_k a_l / (r_k + r_l)^{1+w},

which is the primary path.  Grid inputs (and the cross-check) go through
kernel quadrature on the zeta panels.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from src.config import PANEL_WARN, logger
from src.kernel import component_values, integrate_t
from src.measure import (
    ball_quadrature_batch, box_rule, density, orthant_rule, full_rule, phi_alpha, phi_alpha_full,
    v_full_cube, v_plus_cube,
)
from src.models import (
    AlphaVector, ConeSpec, EpsVector, KernelEvalConfig, MultiIndex, ParameterDomainError,
    SquareFnKind,
)
from src.operators import SpectralFunction, basis_matrix, eigenvalue, parity_part, sign_power
from src.specfun import phi_factor


@dataclass(frozen=True)
class FieldSpec:
    """Derivative field prefactor * D (e^{-shift t} S_t) f, restricted to N_eps when eps is set.

    ``restricted`` selects the orthant semigroup acting on f_eps^+ (coefficients
    2^-d c_m); otherwise the field lives on R^d.
    """

    derivative: str
    j: int = 0
    eps: Optional[EpsVector] = None
    restricted: bool = False
    semigroup: str = 'heat'
    time_weight: str = 't'
    prefactor: float = 1.0
    shift: float = 0.0
    label: str = ''

    def __post_init__(self):
        if self.derivative not in ('t', 'delta', 'delta_star'):
            raise ParameterDomainError(f"unknown field derivative {self.derivative!r}")
        if self.restricted and self.eps is None:
            raise ParameterDomainError("an orthant field needs an eps component")
        if self.semigroup == 'poisson' and self.shift:
            raise ParameterDomainError("shifted fields are heat-only")


def field_spec(kind: SquareFnKind) -> FieldSpec:
    return FieldSpec(kind.derivative, kind.j, kind.eps, kind.eps is not None,
                     kind.semigroup, kind.time_weight, label=kind.label)


@dataclass(frozen=True)
class LaguerreKind:
    """Laguerre-type area integrals: SV and SH(j) for the semigroup 2^d T^{0,+},
    SHtilde(j, i) for 2^d e^{-2t} T^{e_j,+} (delta_j^* when i = j)."""

    operator: str
    j: int = 0
    i: int = 0

    def __post_init__(self):
        if self.operator not in ('SV', 'SH', 'SHtilde'):
            raise ParameterDomainError(f"unknown Laguerre area integral {self.operator!r}")

    @property
    def label(self) -> str:
        if self.operator == 'SV':
            return 'SV/laguerre'
        if self.operator == 'SH':
            return f"SH{self.j + 1}/laguerre"
        return f"SHtilde{self.j + 1},{self.i + 1}/laguerre"

    def field_spec(self, d: int) -> FieldSpec:
        scale = 2.0 ** d
        if self.operator == 'SV':
            return FieldSpec('t', 0, EpsVector.zero(d), True, 'heat', 't', scale, label=self.label)
        if self.operator == 'SH':
            return FieldSpec('delta', self.j, EpsVector.zero(d), True, 'heat', '1', scale, label=self.label)
        derivative = 'delta_star' if self.i == self.j else 'delta'
        return FieldSpec(derivative, self.i, EpsVector.unit(d, self.j), True, 'heat', '1', scale,
                         shift=2.0, label=self.label)


@dataclass
class SquareFnValue:
    value: Union[float, np.ndarray]
    error_estimate: float = 0.0
    warnings: List[str] = field(default_factory=list)
    label: str = ''

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class FieldTerms:
    """Rates r_k (K,) and amplitudes a_k(x) (..., K) of a field sum a_k(x) e^{-r_k t}."""

    rates: np.ndarray
    amps: np.ndarray

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.sum(self.amps * np.exp(-self.rates * t[..., None]), axis=-1)


def field_terms(spec: FieldSpec, f: SpectralFunction, points) -> FieldTerms:
    points = np.asarray(points, dtype=float)
    scale = spec.prefactor * (2.0 ** -f.d if spec.restricted else 1.0)
    rates, factors, targets = [], [], []
    for m, c in f.coeffs.items():
        if spec.eps is not None and not MultiIndex(m).in_parity(spec.eps):
            continue
        lam = eigenvalue(sum(m), f.alpha)
        rate = math.sqrt(lam) if spec.semigroup == 'poisson' else lam + spec.shift
        j = spec.j
        if spec.derivative == 't':
            factor, target = -rate, m
        elif spec.derivative == 'delta':
            if m[j] == 0:
                continue
            factor, target = phi_factor(m[j], f.alpha[j]), m[:j] + (m[j] - 1,) + m[j + 1:]
        else:
            factor, target = phi_factor(m[j] + 1, f.alpha[j]), m[:j] + (m[j] + 1,) + m[j + 1:]
        rates.append(rate)
        factors.append(scale * factor * c)
        targets.append(target)
    if not rates:
        return FieldTerms(np.zeros(0), np.zeros(points.shape[:-1] + (0,)))
    amps = basis_matrix(f.alpha, np.array(targets), points) * np.array(factors)
    return FieldTerms(np.array(rates), amps)


def _grid_field(spec: FieldSpec, f: Callable, alpha: AlphaVector, points: np.ndarray, t: np.ndarray,
                cfg: KernelEvalConfig, nodes: int) -> np.ndarray:
    if spec.semigroup != 'heat':
        raise ParameterDomainError("grid inputs support heat-semigroup fields only")
    y, w = orthant_rule(alpha, nodes)
    zeta = np.tanh(t)[..., None]

    def kernel(x, e):
        value = component_values(spec.derivative, x[..., None, :], y, zeta, alpha, e, cfg, spec.j)
        if spec.shift and spec.derivative == 't':
            # d/dt (e^{-st} G) = e^{-st} (d/dt G - s G)
            value = value - spec.shift * component_values('none', x[..., None, :], y, zeta, alpha, e, cfg)
        return value

    if spec.restricted:
        total = kernel(points, spec.eps) @ (w * f(y))
    else:
        signs = np.where(points < 0, -1.0, 1.0)
        total = 0.0
        for e in ([spec.eps] if spec.eps is not None else EpsVector.all(alpha.d)):
            sign = sign_power(signs, e)
            if spec.derivative != 't':
                sign = sign * signs[..., spec.j]
            total = total + sign * (kernel(np.abs(points), e) @ (w * parity_part(f, y, e)))
    return spec.prefactor * np.exp(-spec.shift * t) * total


def semigroup_field(spec: FieldSpec, f, points, t, alpha: Optional[AlphaVector] = None,
                    cfg: KernelEvalConfig = KernelEvalConfig(), nodes: int = 48) -> np.ndarray:
    """Field value D S_t f at ``points`` (..., d) and times ``t`` broadcastable to points.shape[:-1]."""
    points = np.asarray(points, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), points.shape[:-1])
    if isinstance(f, SpectralFunction):
        return field_terms(spec, f, points).at(t)
    if alpha is None:
        raise ParameterDomainError("grid square functions need alpha")
    return _grid_field(spec, f, alpha, points, t, cfg, nodes)


# ---------------------------------------------------------------------------
# g-functions


def _closed_square(terms: FieldTerms, time_weight: str, warnings: List[str]) -> np.ndarray:
    r = terms.rates
    power = 2 if time_weight == 't' else 1
    gram = 1.0 / (r[:, None] + r[None, :]) ** power
    square = np.einsum('...k,kl,...l->...', terms.amps, gram, terms.amps)
    scale = np.einsum('...k,kk,...k->...', terms.amps, gram, terms.amps)
    if np.any(square < -1e-12 * np.maximum(scale, 1e-300)):
        warnings.append("negative quadratic form clamped at 0")
        logger.warning(warnings[-1])
    return np.maximum(square, 0.0)


def _spec_of(kind) -> FieldSpec:
    return kind if isinstance(kind, FieldSpec) else field_spec(kind)


def g_function(kind: Union[SquareFnKind, FieldSpec], f, x, cfg: KernelEvalConfig = KernelEvalConfig(),
               method: str = 'closed', alpha: Optional[AlphaVector] = None) -> SquareFnValue:
    """||D S_t f(x)|| in L^2(t dt) or L^2(dt) at points x of shape (..., d).

    ``method='closed'`` needs a SpectralFunction; ``'quadrature'`` integrates
    the field over the zeta panels and also accepts grid functions.
    """
    spec = _spec_of(kind)
    x = np.asarray(x, dtype=float)
    warnings: List[str] = []
    if spec.restricted and np.any(x < 0):
        raise ParameterDomainError("orthant square functions are evaluated on R^d_+")
    if method == 'closed':
        if not isinstance(f, SpectralFunction):
            raise ParameterDomainError("the closed form needs a SpectralFunction")
        square = _closed_square(field_terms(spec, f, x), spec.time_weight, warnings)
        value = np.sqrt(square)
        return SquareFnValue(float(value) if value.ndim == 0 else value, 0.0, warnings, spec.label)
    if method != 'quadrature':
        raise ParameterDomainError(f"unknown method {method!r}")
    flat = x.reshape(-1, x.shape[-1])
    values, errors = [], []
    for point in flat:
        def squared(t, zeta, point=point):
            pts = np.broadcast_to(point, t.shape + point.shape)
            return semigroup_field(spec, f, pts, t, alpha, cfg) ** 2
        square, err = integrate_t(squared, spec.time_weight, cfg)
        values.append(math.sqrt(max(square, 0.0)))
        errors.append(0.5 * err / math.sqrt(square) if square > 0 else 0.0)
    value = np.array(values).reshape(x.shape[:-1])
    return SquareFnValue(float(value) if value.ndim == 0 else value, max(errors), warnings, spec.label)


# ---------------------------------------------------------------------------
# Area integrals


def _orthant_pieces(x: np.ndarray, full: bool):
    """Absolute z-bounds splitting the cone where x+z changes sign pattern."""
    d = len(x)
    if not full:
        return [(-x, np.full(d, np.inf))]
    pieces = []
    for bits in EpsVector.all(d):
        neg = bits.as_array().astype(bool)
        lower = np.where(neg, -np.inf, -x)
        upper = np.where(neg, -x, np.inf)
        pieces.append((lower, upper))
    return pieces


def area_square(spec: FieldSpec, f, x, cone: ConeSpec, cfg: KernelEvalConfig,
                alpha: Optional[AlphaVector] = None, full: Optional[bool] = None) -> Tuple[float, float]:
    """int_A |field(x+z, t)|^2 phi(x, z, t) dz t^w dt and its panel-difference estimate.

    Orthant geometry (``full=False``) clips x+z to R^d_+ and normalizes by
    V^{alpha,+}; full geometry integrates over R^d with V^alpha, split by sign
    pattern so each piece sees a smooth weight.
    """
    x = np.asarray(x, dtype=float)
    alpha = f.alpha if isinstance(f, SpectralFunction) else alpha
    if alpha is None:
        raise ParameterDomainError("grid square functions need alpha")
    full = (not spec.restricted) if full is None else full
    if not full and np.any(x < 0):
        raise ParameterDomainError("orthant area integrals are evaluated on R^d_+")
    weight = phi_alpha_full if full else phi_alpha
    pieces = _orthant_pieces(x, full)
    d = len(x)

    def squared(t, zeta):
        root = np.sqrt(t)[:, None]
        total = np.zeros(len(t))
        for lower, upper in pieces:
            pts, wts = ball_quadrature_batch(np.zeros(d), cone.beta, cone.points,
                                             lower[None, :] / root, upper[None, :] / root)
            z = pts * root[:, :, None]
            dz = wts * root ** d
            values = semigroup_field(spec, f, x + z, t[:, None], alpha, cfg)
            total = total + np.sum(dz * values ** 2 * weight(x, z, t[:, None], alpha), axis=-1)
        return total

    return integrate_t(squared, spec.time_weight, cfg)


def _area_value(spec: FieldSpec, f, x, cone, cfg, alpha, full=None) -> SquareFnValue:
    square, err = area_square(spec, f, x, cone, cfg, alpha, full)
    value = math.sqrt(max(square, 0.0))
    warnings = []
    rel = err / square if square > 0 else 0.0
    if rel > PANEL_WARN:
        warnings.append(f"cone refinement disagreement {rel:.2e} for {spec.label}")
        logger.warning(warnings[-1])
    return SquareFnValue(value, 0.5 * rel * value, warnings, spec.label)


def area_integral(kind: SquareFnKind, f, x, cone: ConeSpec = ConeSpec(),
                  cfg: KernelEvalConfig = KernelEvalConfig(),
                  alpha: Optional[AlphaVector] = None) -> SquareFnValue:
    """Lusin area integral S(f)(x) over the cone |z| < beta sqrt(t) at a single point x."""
    if not kind.is_area:
        raise ParameterDomainError(f"{kind.operator} is not an area integral")
    return _area_value(field_spec(kind), f, x, cone, cfg, alpha)


def component_area_integral(kind: SquareFnKind, f, x, eps: EpsVector, cone: ConeSpec = ConeSpec(),
                            cfg: KernelEvalConfig = KernelEvalConfig(),
                            alpha: Optional[AlphaVector] = None) -> SquareFnValue:
    """Full-space area integral of the eps component D S_t^{eps} f_eps (all of R^d, full cubes)."""
    if not kind.is_area:
        raise ParameterDomainError(f"{kind.operator} is not an area integral")
    spec = FieldSpec(kind.derivative, kind.j, eps, False, kind.semigroup, kind.time_weight,
                     label=f"{kind.operator}/component eps{eps}")
    return _area_value(spec, f, x, cone, cfg, alpha, full=True)


def laguerre_area_integral(kind: LaguerreKind, f, x, cone: ConeSpec = ConeSpec(),
                           cfg: KernelEvalConfig = KernelEvalConfig(),
                           alpha: Optional[AlphaVector] = None) -> SquareFnValue:
    d = f.d if isinstance(f, SpectralFunction) else alpha.d
    return _area_value(kind.field_spec(d), f, x, cone, cfg, alpha)


def laguerre_field(kind: LaguerreKind, f, x, t, alpha: Optional[AlphaVector] = None,
                   cfg: KernelEvalConfig = KernelEvalConfig()) -> np.ndarray:
    d = f.d if isinstance(f, SpectralFunction) else alpha.d
    return semigroup_field(kind.field_spec(d), f, x, t, alpha, cfg)


def ball_volume(d: int, r) -> np.ndarray:
    return np.exp(0.5 * d * math.log(math.pi) - gammaln(d / 2.0 + 1.0)) * np.power(r, d)


def collapsed_area_value(kind: SquareFnKind, f: SpectralFunction, x, beta: float,
                         cfg: KernelEvalConfig = KernelEvalConfig()) -> float:
    """Small-aperture limit of the area integral: field frozen at x, cone cross-section |B(0, beta sqrt t)|."""
    spec = field_spec(kind)
    x = np.asarray(x, dtype=float)
    cube = v_plus_cube if spec.restricted else v_full_cube
    terms = field_terms(spec, f, x)

    def squared(t, zeta):
        values = terms.at(t)
        return values ** 2 * density(x, f.alpha) * ball_volume(len(x), beta * np.sqrt(t)) / cube(x, np.sqrt(t), f.alpha)

    square, _ = integrate_t(squared, spec.time_weight, cfg)
    return math.sqrt(max(square, 0.0))


# ---------------------------------------------------------------------------
# L^2 relations and empirical L^p / weak-type probes


def horizontal_l2_aggregate(f: SpectralFunction, eps: EpsVector, star: bool = False,
                            semigroup: str = 'heat') -> float:
    """|| |(g_H^{1,eps,+} f, ..., g_H^{d,eps,+} f)|_{l^2} ||_{L^2(dw^+)} / ||f_eps^+||, exactly.

    Heat: 2^{-3d} sum_j sum_m c_m^2 Phi^2 / (2 lambda); Poisson (t dt): 1/(4 lambda).
    """
    d = f.d
    total = 0.0
    norm = 0.0
    for m, c in f.coeffs.items():
        if not MultiIndex(m).in_parity(eps):
            continue
        lam = eigenvalue(sum(m), f.alpha)
        norm += c * c
        denom = 2.0 * lam if semigroup == 'heat' else 4.0 * lam
        for j in range(d):
            phi = phi_factor(m[j] + 1, f.alpha[j]) if star else phi_factor(m[j], f.alpha[j])
            total += c * c * phi * phi / denom
    if norm == 0:
        return 0.0
    return math.sqrt(2.0 ** (-3 * d) * total / (2.0 ** -d * norm))


def default_grid(kind: SquareFnKind, alpha: AlphaVector, n: int = 32, radius: float = 6.0):
    return box_rule(alpha, n, radius, full=kind.fullspace)


def exact_grid(kind: SquareFnKind, alpha: AlphaVector, n: int = 24):
    """Laguerre-type grid, exact for |g|^2 of finite expansions."""
    return full_rule(alpha, n) if kind.fullspace else orthant_rule(alpha, n)


def evaluate(kind: SquareFnKind, f, points, cone: ConeSpec = ConeSpec(),
             cfg: KernelEvalConfig = KernelEvalConfig()) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if not kind.is_area:
        return np.asarray(g_function(kind, f, points, cfg).value)
    flat = points.reshape(-1, points.shape[-1])
    values = [area_integral(kind, f, p, cone, cfg).value for p in flat]
    return np.array(values).reshape(points.shape[:-1])


def _input_values(kind: SquareFnKind, f: SpectralFunction, points: np.ndarray) -> np.ndarray:
    if kind.fullspace:
        return f(points)
    return f.filter(lambda m: MultiIndex(m).in_parity(kind.eps))(points)


def weighted_lp_ratio(kind: SquareFnKind, f: SpectralFunction, weight: Optional[Callable] = None,
                      p: float = 2.0, grid: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                      cone: ConeSpec = ConeSpec(), cfg: KernelEvalConfig = KernelEvalConfig()) -> float:
    """||S(f)||_{L^p(U dw)} / ||f||_{L^p(U dw)} on a quadrature grid (orthant and f_eps^+ for eps variants)."""
    if not p > 1:
        raise ParameterDomainError(f"p must exceed 1, got {p}")
    points, wts = default_grid(kind, f.alpha) if grid is None else grid
    if weight is not None:
        wts = wts * np.asarray(weight(points), dtype=float)
    g = evaluate(kind, f, points, cone, cfg)
    base = _input_values(kind, f, points)
    numerator = np.sum(wts * np.abs(g) ** p) ** (1.0 / p)
    denominator = np.sum(wts * np.abs(base) ** p) ** (1.0 / p)
    return float(numerator / denominator)


@dataclass
class WeakTypeProbe:
    lambdas: np.ndarray
    ratios: np.ndarray

    @property
    def constant(self) -> float:
        return float(np.max(self.ratios)) if len(self.ratios) else 0.0


def weak11_probe(kind: SquareFnKind, f: SpectralFunction, weight: Optional[Callable] = None,
                 lambdas: Optional[Sequence[float]] = None,
                 grid: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 cone: ConeSpec = ConeSpec(), cfg: KernelEvalConfig = KernelEvalConfig()) -> WeakTypeProbe:
    """lambda * (U dw)({S(f) > lambda}) / ||f||_{L^1(U dw)} over a lambda grid.

    Without an explicit grid the levels are max S(f) * 2^{-k}, which keeps the
    probe invariant under f -> c f.
    """
    points, wts = default_grid(kind, f.alpha) if grid is None else grid
    if weight is not None:
        wts = wts * np.asarray(weight(points), dtype=float)
    g = evaluate(kind, f, points, cone, cfg)
    l1 = float(np.sum(wts * np.abs(_input_values(kind, f, points))))
    if lambdas is None:
        lambdas = float(np.max(g)) * 2.0 ** -np.arange(0, 24)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))
    ratios = np.array([lam * np.sum(wts[g > lam]) / l1 for lam in lambdas])
    return WeakTypeProbe(lambdas, ratios)
