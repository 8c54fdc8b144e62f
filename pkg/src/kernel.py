"""Dunkl heat kernel components, derivative kernels, cone kernels and their Banach norms.

Component kernels G_t^{alpha,eps}(x, y) are evaluated for x, y in the closed
positive orthant.  With zeta = tanh t and c = (1 - zeta^2) / (2 zeta) every
component factorizes over coordinates:

    G = prod_i 1/2 c^{1+beta_i} (x_i y_i)^{eps_i} int exp(-q_+/(4 zeta) - zeta q_-/4) Pi_{beta_i}(ds_i)

with beta = alpha + eps.  The exponential is split as e^{L_i} e^{-u_i (1 + s_i)},
u_i = c x_i y_i, so the remaining Pi-moments are bounded and nothing overflows.
The moments come from Gauss-Jacobi quadrature ('schlafli') or from the
closed form int e^{-us} Pi_beta(ds) = I_beta(u)/u^beta ('bessel').  'series'
sums the spectral expansion directly and serves as the oracle.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.special import gamma, gammaincc, roots_legendre

from src.config import PANEL_WARN, TAIL_WARN, logger
from src.measure import ball_quadrature_batch, phi_alpha, pi_beta_rule_1d
from src.models import (
    AlphaVector, ConeSpec, EpsVector, KernelEvalConfig, ParameterDomainError, PreconditionError,
)
from src.specfun import bessel_i_ratio, hermite_1d_all, phi_factor

MAX_PI_NODES = 2048
MAX_SERIES_TRUNCATION = 4096
DERIVATIVES = ('none', 't', 'delta', 'delta_star')
SPACES = ('tdt', 'dt', 'A_tdt', 'A_dt')


@dataclass(frozen=True)
class ZetaTime:
    t: float
    zeta: float

    @classmethod
    def from_t(cls, t: float) -> 'ZetaTime':
        if not t > 0:
            raise ParameterDomainError(f"t must be positive, got {t}")
        return cls(float(t), math.tanh(t))

    @classmethod
    def from_zeta(cls, zeta: float) -> 'ZetaTime':
        if not 0 < zeta < 1:
            raise ParameterDomainError(f"zeta must lie in (0, 1), got {zeta}")
        return cls(math.atanh(zeta), float(zeta))


def zeta_time(t: Optional[float] = None, zeta: Optional[float] = None) -> ZetaTime:
    if (t is None) == (zeta is None):
        raise ParameterDomainError("give exactly one of t and zeta")
    return ZetaTime.from_t(t) if t is not None else ZetaTime.from_zeta(zeta)


@dataclass(frozen=True)
class QPair:
    q_plus: np.ndarray
    q_minus: np.ndarray


def q_pm(x, y, s) -> QPair:
    """q_pm = |x|^2 + |y|^2 +- 2 sum x_i y_i s_i."""
    x, y, s = (np.asarray(v, dtype=float) for v in (x, y, s))
    if np.any(np.abs(s) > 1):
        raise ParameterDomainError("s must lie in [-1, 1]^d")
    base = np.sum(x * x, axis=-1) + np.sum(y * y, axis=-1)
    cross = 2.0 * np.sum(x * y * s, axis=-1)
    return QPair(base + cross, base - cross)


@dataclass
class KernelValue:
    """Kernel value(s) plus accuracy diagnostics."""

    value: np.ndarray
    representation: str
    tail: float = 0.0
    warnings: List[str] = field(default_factory=list)

    def __float__(self) -> float:
        return float(self.value)


@dataclass
class NormValue:
    value: float
    error_estimate: float = 0.0
    warnings: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Pi-moments and the factorized component


def _pi_moments(beta: float, u: np.ndarray, cfg: KernelEvalConfig, warnings: List[str]):
    """Scaled moments int e^{-u(1+s)} Pi_beta(ds) and int s e^{-u(1+s)} Pi_beta(ds)."""
    if cfg.representation == 'schlafli':
        # Gauss nodes must resolve e^{-us}; grow the rule with u
        need = int(0.8 * float(np.max(u, initial=0.0))) + 16
        n = max(cfg.nodes, need)
        n = min(16 * math.ceil(n / 16), MAX_PI_NODES)
        if need > MAX_PI_NODES:
            message = f"Pi rule capped at {MAX_PI_NODES} nodes"
            if message not in warnings:
                warnings.append(message)
        nodes, weights = pi_beta_rule_1d(beta, n)
        e = np.exp(-u[..., None] * (1.0 + nodes))
        return e @ weights, (e * nodes) @ weights
    m0 = bessel_i_ratio(beta, u, scaled=True)
    m1 = -u * bessel_i_ratio(beta + 1.0, u, scaled=True)
    return np.asarray(m0), np.asarray(m1)


@dataclass
class _Coordinate:
    pref: np.ndarray   # 1/2 c^{1+beta} e^{L}
    sym: np.ndarray    # (x y)^eps
    m0: np.ndarray
    m1: np.ndarray
    x: np.ndarray
    y: np.ndarray
    a: float
    e: int


def _coordinates(x, y, zeta, alpha: AlphaVector, eps: EpsVector, cfg: KernelEvalConfig,
                 warnings: List[str]) -> List[_Coordinate]:
    c = (1.0 - zeta) * (1.0 + zeta) / (2.0 * zeta)
    out = []
    for i in range(alpha.d):
        xi, yi = x[..., i], y[..., i]
        a, e = alpha[i], eps[i]
        beta = a + e
        u = c * xi * yi
        exponent = -((xi - yi) ** 2 + zeta ** 2 * (xi + yi) ** 2) / (4.0 * zeta)
        pref = 0.5 * np.exp(exponent + (1.0 + beta) * np.log(c))
        m0, m1 = _pi_moments(beta, u, cfg, warnings)
        sym = xi * yi if e else np.ones_like(u)
        out.append(_Coordinate(pref, sym, m0, m1, xi, yi, a, e))
    return out


def _product_except(values: List[np.ndarray], skip: int) -> np.ndarray:
    out = np.ones_like(values[0])
    for k, v in enumerate(values):
        if k != skip:
            out = out * v
    return out


def _broadcast(x, y, zeta, d: int):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if x.shape[-1] != d or y.shape[-1] != d:
        raise ParameterDomainError(f"points must have last axis d={d}")
    if np.any(x < 0) or np.any(y < 0):
        raise ParameterDomainError("component kernels need x, y in the closed positive orthant")
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1], zeta.shape)
    return (np.broadcast_to(x, shape + (d,)), np.broadcast_to(y, shape + (d,)),
            np.broadcast_to(zeta, shape))


def component_values(derivative: str, x, y, zeta, alpha: AlphaVector, eps: EpsVector,
                     cfg: KernelEvalConfig, j: int = 0,
                     warnings: Optional[List[str]] = None) -> np.ndarray:
    """G^{alpha,eps}, d/dt G, delta_{j,x} G or delta*_{j,x} G at (x, y, zeta), vectorized."""
    if derivative not in DERIVATIVES:
        raise ParameterDomainError(f"unknown derivative {derivative!r}")
    if not 0 <= j < alpha.d:
        raise ParameterDomainError(f"coordinate index {j} out of range")
    warnings = [] if warnings is None else warnings
    x, y, zeta = _broadcast(x, y, zeta, alpha.d)
    coords = _coordinates(x, y, zeta, alpha, eps, cfg, warnings)
    factors = [co.pref * co.sym * co.m0 for co in coords]
    value = _product_except(factors, -1)
    if derivative == 'none':
        return value
    if derivative == 't':
        big_d = alpha.d + alpha.total + eps.total
        scale = _product_except([co.pref * co.sym for co in coords], -1)
        m0s = [co.m0 for co in coords]
        h = big_d * (1.0 + zeta ** 2) / zeta * _product_except(m0s, -1)
        bracket = np.zeros_like(h)
        for i, co in enumerate(coords):
            base = (co.x ** 2 + co.y ** 2) * co.m0
            cross = 2.0 * co.x * co.y * co.m1
            q_plus, q_minus = base + cross, base - cross
            bracket = bracket + (zeta / 4.0 * q_minus - q_plus / (4.0 * zeta)) * _product_except(m0s, i)
        h = h + (1.0 - zeta ** 2) / zeta * bracket
        return -scale * h
    co = coords[j]
    grad = co.x * (1.0 / (2.0 * zeta) + zeta / 2.0) * co.m0 + co.y * (1.0 / (2.0 * zeta) - zeta / 2.0) * co.m1
    inner = co.sym * (co.x * co.m0 - grad)
    if co.e:
        inner = inner + (2.0 * co.a + 2.0) * co.y * co.m0
    delta = co.pref * inner * _product_except(factors, j)
    if derivative == 'delta':
        return delta
    return -delta + 2.0 * co.x * value


# ---------------------------------------------------------------------------
# Series oracle


def series_tail_bound(t: float, alpha: AlphaVector, truncation: int) -> float:
    """e^{-t lambda_{N+1}} (N+2)^d / (1 - e^{-2t}): geometric bound on the dropped shells."""
    lam = 2.0 * (truncation + 1) + 2.0 * alpha.total + 2.0 * alpha.d
    return math.exp(-t * lam) * (truncation + 2.0) ** alpha.d / -math.expm1(-2.0 * t)


def series_truncation_for(t: float, alpha: AlphaVector, tol: float) -> int:
    """Smallest truncation whose tail bound is below ``tol``."""
    n = 8
    while series_tail_bound(t, alpha, n) > tol and n < MAX_SERIES_TRUNCATION:
        n = int(n * 1.25) + 1
    return min(n, MAX_SERIES_TRUNCATION)


def _series_shells(arrays: List[np.ndarray], truncation: int) -> np.ndarray:
    """Total-degree shells S_n = sum_{|k|=n} prod_i A_i[k_i] for n <= N (truncated convolution)."""
    shells = arrays[0][..., :truncation + 1]
    for a in arrays[1:]:
        out = np.zeros_like(shells)
        for k in range(truncation + 1):
            out[..., k:] += shells[..., k:k + 1] * a[..., :truncation + 1 - k]
        shells = out
    return shells


def series_values(derivative: str, x, y, t: float, alpha: AlphaVector, eps: EpsVector,
                  truncation: int, j: int = 0) -> np.ndarray:
    """Spectral sum over m in N_eps, |m| <= truncation, with the derivative applied termwise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    n = truncation
    ks = np.arange(n + 2)
    decay = np.exp(-2.0 * t * ks[:n + 1])
    arrays = []
    for i in range(alpha.d):
        hx = hermite_1d_all(n + 1, alpha[i], x[..., i])
        hy = hermite_1d_all(n + 1, alpha[i], y[..., i])
        parity = (ks[:n + 1] % 2) == eps[i]
        if derivative in ('delta', 'delta_star') and i == j:
            if derivative == 'delta':
                phis = np.array([phi_factor(k, alpha[i]) for k in range(n + 1)])
                left = np.concatenate([np.zeros(x.shape[:-1] + (1,)), hx[..., :n]], axis=-1)
            else:
                phis = np.array([phi_factor(k + 1, alpha[i]) for k in range(n + 1)])
                left = hx[..., 1:n + 2]
            a = decay * phis * left * hy[..., :n + 1]
        else:
            a = decay * hx[..., :n + 1] * hy[..., :n + 1]
        arrays.append(np.where(parity, a, 0.0))
    shells = _series_shells(arrays, n)
    lam = 2.0 * np.arange(n + 1) + 2.0 * alpha.total + 2.0 * alpha.d
    lead = math.exp(-t * (2.0 * alpha.total + 2.0 * alpha.d))
    if derivative == 't':
        return -lead * np.sum(lam * shells, axis=-1)
    return lead * np.sum(shells, axis=-1)


# ---------------------------------------------------------------------------
# Public kernels


def _signs(x: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(x) < 0, -1.0, 1.0)


def _evaluate(derivative: str, x, y, t, alpha: AlphaVector, eps: Optional[EpsVector],
              cfg: KernelEvalConfig, j: int) -> KernelValue:
    if np.any(np.asarray(t) <= 0):
        raise ParameterDomainError("t must be positive")
    warnings: List[str] = []
    tail = 0.0
    if eps is None:
        # full kernel: parity extension of the 2^d components
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sx, sy = _signs(x), _signs(y)
        total = 0.0
        for e in EpsVector.all(alpha.d):
            ev = e.as_array()
            part = _evaluate(derivative, np.abs(x), np.abs(y), t, alpha, e, cfg, j)
            sign = np.prod(np.power(sx, ev), axis=-1) * np.prod(np.power(sy, ev), axis=-1)
            if derivative in ('delta', 'delta_star'):
                # delta_j flips the x_j parity of the component
                sign = sign * sx[..., j]
            total = total + sign * part.value
            tail += part.tail
            warnings.extend(w for w in part.warnings if w not in warnings)
        return KernelValue(total, cfg.representation, tail, warnings)
    if cfg.representation == 'series':
        if np.ndim(t):
            raise ParameterDomainError("series representation takes a scalar t")
        value = series_values(derivative, x, y, float(t), alpha, eps, cfg.truncation, j)
        tail = series_tail_bound(float(t), alpha, cfg.truncation)
        if tail > TAIL_WARN:
            warnings.append(f"series tail bound {tail:.2e} above {TAIL_WARN:.0e}")
    else:
        value = component_values(derivative, x, y, np.tanh(t), alpha, eps, cfg, j, warnings)
    for w in warnings:
        logger.debug(w)
    return KernelValue(value, cfg.representation, tail, warnings)


def heat_kernel(x, y, t, alpha: AlphaVector, eps: Optional[EpsVector] = None,
                cfg: KernelEvalConfig = KernelEvalConfig()) -> KernelValue:
    """G_t^{alpha,eps}(x, y); ``eps=None`` gives the full kernel at any x, y in R^d."""
    return _evaluate('none', x, y, t, alpha, eps, cfg, 0)


def dt_heat_kernel(x, y, t, alpha: AlphaVector, eps: Optional[EpsVector] = None,
                   cfg: KernelEvalConfig = KernelEvalConfig()) -> KernelValue:
    return _evaluate('t', x, y, t, alpha, eps, cfg, 0)


def delta_j_kernel(x, y, t, alpha: AlphaVector, j: int, eps: Optional[EpsVector] = None,
                   cfg: KernelEvalConfig = KernelEvalConfig()) -> KernelValue:
    """delta_{j,x} G_t^{alpha,eps}(x, y), delta picked by the x_j parity of the component."""
    return _evaluate('delta', x, y, t, alpha, eps, cfg, j)


def delta_j_star_kernel(x, y, t, alpha: AlphaVector, j: int, eps: Optional[EpsVector] = None,
                        cfg: KernelEvalConfig = KernelEvalConfig()) -> KernelValue:
    """delta*_{j,x} G = -delta_{j,x} G + 2 x_j G."""
    return _evaluate('delta_star', x, y, t, alpha, eps, cfg, j)


def finite_difference_dt(x, y, t: float, alpha: AlphaVector, eps: Optional[EpsVector] = None,
                         cfg: KernelEvalConfig = KernelEvalConfig(), step: float = 1e-5) -> np.ndarray:
    """Centered difference of heat_kernel in t."""
    up = heat_kernel(x, y, t + step, alpha, eps, cfg).value
    down = heat_kernel(x, y, t - step, alpha, eps, cfg).value
    return (up - down) / (2.0 * step)


@dataclass(frozen=True)
class KernelFamily:
    """{prefactor e^{-shift t} D G_t^{alpha,eps}(x, y)}_{t>0} for one derivative D."""

    derivative: str
    alpha: AlphaVector
    eps: EpsVector
    j: int = 0
    prefactor: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.derivative not in DERIVATIVES:
            raise ParameterDomainError(f"unknown derivative {self.derivative!r}")

    def evaluate(self, x, y, zeta, cfg: KernelEvalConfig,
                 warnings: Optional[List[str]] = None) -> np.ndarray:
        value = component_values(self.derivative, x, y, zeta, self.alpha, self.eps, cfg, self.j, warnings)
        if self.shift:
            # e^{-shift t} = ((1 - zeta)/(1 + zeta))^{shift/2}
            value = value * np.power((1.0 - zeta) / (1.0 + zeta), self.shift / 2.0)
        return self.prefactor * value


def area_kernel(family: KernelFamily, x, y, z, t, cfg: KernelEvalConfig = KernelEvalConfig()) -> np.ndarray:
    """K_{z,t}(x, y) = D G_t(x+z, y) sqrt(phi_alpha(x, z, t)), zero once x+z leaves the orthant."""
    x = np.asarray(x, dtype=float)
    shifted = x + np.asarray(z, dtype=float)
    inside = np.all(shifted >= 0, axis=-1)
    safe = np.where(shifted >= 0, shifted, 0.0)
    value = family.evaluate(safe, y, np.tanh(t), cfg)
    weight = np.sqrt(phi_alpha(x, z, t, family.alpha))
    return np.where(inside, value * weight, 0.0)


# ---------------------------------------------------------------------------
# zeta panels and norms


@dataclass(frozen=True)
class ZetaRule:
    """Gauss-Legendre panels on (0,1) with an embedded half-order rule."""

    nodes: np.ndarray
    weights: np.ndarray
    coarse_nodes: np.ndarray
    coarse_weights: np.ndarray
    breaks: Tuple[float, ...]

    @property
    def t(self) -> np.ndarray:
        return np.arctanh(self.nodes)

    @property
    def coarse_t(self) -> np.ndarray:
        return np.arctanh(self.coarse_nodes)


def _panel_points(breaks: List[float], n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append((a + b) / 2.0 + (b - a) / 2.0 * x)
        weights.append((b - a) / 2.0 * w)
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=32)
def zeta_panels(panels: int, points: int) -> ZetaRule:
    """Panels with breakpoints 1/2 * 4^-k toward 0 and 1 - 1/2 * 4^-k toward 1."""
    half = panels // 2
    low = [0.0] + [0.5 * 4.0 ** -k for k in range(half - 1, -1, -1)]
    high = [1.0 - 0.5 * 4.0 ** -k for k in range(1, half)] + [1.0]
    breaks = low + high
    nodes, weights = _panel_points(breaks, points)
    coarse_nodes, coarse_weights = _panel_points(breaks, max(points // 2, 1))
    for arr in (nodes, weights, coarse_nodes, coarse_weights):
        arr.setflags(write=False)
    return ZetaRule(nodes, weights, coarse_nodes, coarse_weights, tuple(breaks))


def integrate_t(squared: Callable[[np.ndarray, np.ndarray], np.ndarray], time_weight: str,
                cfg: KernelEvalConfig) -> Tuple[float, float]:
    """int_0^inf F(t) t^w dt for F = squared(t, zeta) >= 0, via dt = dzeta/(1-zeta^2).

    Returns the value and the embedded-rule difference.
    """
    rule = zeta_panels(cfg.panels, cfg.panel_points)

    def total(nodes, weights):
        t = np.arctanh(nodes)
        jac = weights / ((1.0 - nodes) * (1.0 + nodes))
        if time_weight == 't':
            jac = jac * t
        return float(np.sum(jac * squared(t, nodes)))

    fine = total(rule.nodes, rule.weights)
    coarse = total(rule.coarse_nodes, rule.coarse_weights)
    return fine, abs(fine - coarse)


def t_norm(field_of_t: Callable[[np.ndarray, np.ndarray], np.ndarray], time_weight: str,
           cfg: KernelEvalConfig = KernelEvalConfig()) -> NormValue:
    """L^2(t dt) (time_weight 't') or L^2(dt) ('1') norm of a scalar field over t > 0."""
    value, err = integrate_t(lambda t, z: np.abs(field_of_t(t, z)) ** 2, time_weight, cfg)
    return _finish_norm(value, err)


def _finish_norm(square: float, err: float) -> NormValue:
    square = max(square, 0.0)
    value = math.sqrt(square)
    rel = err / square if square > 0 else 0.0
    warnings = []
    if rel > PANEL_WARN:
        warnings.append(f"zeta-panel refinement disagreement {rel:.2e}")
        logger.warning(warnings[-1])
    return NormValue(value, 0.5 * rel * value, warnings)


def cone_points(x: np.ndarray, t: np.ndarray, cone: ConeSpec, lower: Optional[np.ndarray] = None):
    """Cross-section nodes z = sqrt(t) u, |u| < beta, u >= lower(t), per t node.

    Returns z of shape (T, N, d) and weights dz of shape (T, N).
    """
    d = len(x)
    root = np.sqrt(t)[:, None]
    if lower is None:
        lower = -np.asarray(x)[None, :] / root
    pts, wts = ball_quadrature_batch(np.zeros(d), cone.beta, cone.points, lower)
    z = pts * root[:, :, None]
    return z, wts * root ** d


def _cone_square(family: KernelFamily, x: np.ndarray, y: np.ndarray, lower_x: np.ndarray,
                 cone: ConeSpec, time_weight: str, cfg: KernelEvalConfig,
                 other: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 warnings: Optional[List[str]] = None) -> Tuple[float, float]:
    """int_A |K(x,y) - K(x',y')|^2 over the cone cut to x+z >= 0 below ``lower_x``."""

    def squared(t, zeta):
        z, dz = cone_points(x, t, cone, -lower_x[None, :] / np.sqrt(t)[:, None])
        tt = t[:, None]
        value = _cone_field(family, x, y, z, tt, zeta[:, None], cfg, warnings)
        if other is not None:
            value = value - _cone_field(family, other[0], other[1], z, tt, zeta[:, None], cfg, warnings)
        return np.sum(dz * value ** 2, axis=-1)

    return integrate_t(squared, time_weight, cfg)


def _cone_field(family, x, y, z, t, zeta, cfg, warnings):
    shifted = x + z
    inside = np.all(shifted >= 0, axis=-1)
    safe = np.where(shifted >= 0, shifted, 0.0)
    value = family.evaluate(safe, y, zeta, cfg, warnings)
    weight = np.sqrt(phi_alpha(x, z, t, family.alpha))
    return np.where(inside, value * weight, 0.0)


def banach_norm(family: KernelFamily, x, y, space: str, cone: ConeSpec = ConeSpec(),
                cfg: KernelEvalConfig = KernelEvalConfig(),
                x_other=None, y_other=None) -> NormValue:
    """||K(x,y)||_B, or ||K(x,y) - K(x',y')||_B when x_other / y_other are given.

    B is L^2(t dt), L^2(dt), or the cone spaces L^2(A, t dt dz), L^2(A, dt dz).
    """
    if space not in SPACES:
        raise ParameterDomainError(f"unknown space {space!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xo = x if x_other is None else np.asarray(x_other, dtype=float)
    yo = y if y_other is None else np.asarray(y_other, dtype=float)
    differs = x_other is not None or y_other is not None
    if not differs and np.allclose(x, y):
        raise PreconditionError("kernel norms need x != y")
    time_weight = 't' if space in ('tdt', 'A_tdt') else '1'
    warnings: List[str] = []

    if space in ('tdt', 'dt'):
        def field_of_t(t, zeta):
            value = family.evaluate(x, y, zeta, cfg, warnings)
            if differs:
                value = value - family.evaluate(xo, yo, zeta, cfg, warnings)
            return value

        result = t_norm(field_of_t, time_weight, cfg)
        result.warnings.extend(warnings)
        return result

    if not differs:
        square, err = _cone_square(family, x, y, x, cone, time_weight, cfg, None, warnings)
    elif np.array_equal(x, xo):
        square, err = _cone_square(family, x, y, x, cone, time_weight, cfg, (xo, yo), warnings)
    else:
        # the cut x+z >= 0 moves with x: split into the common part and two slabs
        common = np.minimum(x, xo)
        both, e1 = _cone_square(family, x, y, common, cone, time_weight, cfg, (xo, yo), warnings)
        own_x, e2 = _cone_square(family, x, y, x, cone, time_weight, cfg, None, warnings)
        cut_x, e3 = _cone_square(family, x, y, common, cone, time_weight, cfg, None, warnings)
        own_o, e4 = _cone_square(family, xo, yo, xo, cone, time_weight, cfg, None, warnings)
        cut_o, e5 = _cone_square(family, xo, yo, common, cone, time_weight, cfg, None, warnings)
        square = both + max(own_x - cut_x, 0.0) + max(own_o - cut_o, 0.0)
        err = e1 + e2 + e3 + e4 + e5
    result = _finish_norm(square, err)
    result.warnings.extend(w for w in warnings if w not in result.warnings)
    return result


# ---------------------------------------------------------------------------
# Panel sanity checks


@dataclass
class PanelSanity:
    gamma_constant: float
    gamma_max_rel_error: float
    log_constant: float


def panel_sanity(cfg: KernelEvalConfig = KernelEvalConfig(), a: float = 2.5,
                 c: float = 1.0) -> PanelSanity:
    """Check the zeta rule on int_0^1 zeta^-a e^{-T/zeta} and int_0^1 zeta^-3 log((1+z)/(1-z)) e^{-cq/zeta}.

    Reports sup_T T^{a-1} I_1(T), the worst relative error of I_1 against its
    incomplete-Gamma closed form, and sup_q q I_2(q).
    """
    if a <= 1:
        raise ParameterDomainError("panel sanity needs a > 1")
    rule = zeta_panels(cfg.panels, cfg.panel_points)
    z, w = rule.nodes, rule.weights
    scales = np.geomspace(1e-3, 1e2, 26)
    gamma_constant = 0.0
    worst = 0.0
    log_constant = 0.0
    for s in scales:
        approx = float(np.sum(w * z ** -a * np.exp(-s / z)))
        exact = s ** (1.0 - a) * gammaincc(a - 1.0, s) * gamma(a - 1.0)
        worst = max(worst, abs(approx - exact) / exact)
        gamma_constant = max(gamma_constant, approx * s ** (a - 1.0))
        second = float(np.sum(w * z ** -3 * np.log((1.0 + z) / (1.0 - z)) * np.exp(-c * s / z)))
        log_constant = max(log_constant, second * s)
    return PanelSanity(gamma_constant, worst, log_constant)
