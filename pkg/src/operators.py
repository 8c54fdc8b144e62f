"""Dunkl operators, ladder operators, the oscillator and the heat/Poisson semigroups.

Spectral functions are finite expansions f = sum c_m h_m^alpha and every
diagonal or ladder operator acts on them exactly.  Grid functions are tensor
samples with an interpolant. The heat semigroup acts on them by kernel
quadrature; the Poisson semigroup by projection onto the Hermite basis.
"""

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import roots_genlaguerre

from src.config import (
    GRID_PROJECTION_LENGTH, GRID_QUAD_NODES, SUBORDINATION_NODES, SUBORDINATION_TOL, logger,
)
from src.kernel import component_values
from src.measure import full_rule, orthant_rule
from src.models import (
    AlphaVector, EpsVector, KernelEvalConfig, MultiIndex, ParameterDomainError, PreconditionError,
    multi_indices,
)
from src.specfun import hermite_1d_all, hermite_gen, phi_factor

Index = Tuple[int, ...]
INTERPOLATION_METHODS = {1: 'linear', 3: 'cubic', 5: 'quintic'}


def eigenvalue(n: int, alpha: AlphaVector, d: Optional[int] = None) -> float:
    """lambda_n^alpha = 2n + 2|alpha| + 2d."""
    if n < 0:
        raise ParameterDomainError(f"eigenvalue index must be >= 0, got {n}")
    d = alpha.d if d is None else d
    return 2.0 * n + 2.0 * alpha.total + 2.0 * d


@dataclass(frozen=True)
class EigenvalueTable:
    alpha: AlphaVector
    size: int

    @property
    def values(self) -> np.ndarray:
        return 2.0 * np.arange(self.size + 1) + 2.0 * self.alpha.total + 2.0 * self.alpha.d

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])


def basis_matrix(alpha: AlphaVector, indices: np.ndarray, x) -> np.ndarray:
    """h_m^alpha(x) for every row m of ``indices``; shape x.shape[:-1] + (M,)."""
    x = np.asarray(x, dtype=float)
    indices = np.asarray(indices, dtype=int).reshape(-1, alpha.d)
    out = np.ones(x.shape[:-1] + (len(indices),))
    if len(indices) == 0:
        return out
    for i in range(alpha.d):
        table = hermite_1d_all(int(indices[:, i].max()), alpha[i], x[..., i])
        out = out * table[..., indices[:, i]]
    return out


@dataclass(frozen=True)
class SpectralFunction:
    """Finite expansion sum_m c_m h_m^alpha with exact Parseval norm."""

    alpha: AlphaVector
    coeffs: Dict[Index, float] = field(default_factory=dict)

    def __post_init__(self):
        clean: Dict[Index, float] = {}
        for m, c in self.coeffs.items():
            m = tuple(int(v) for v in (m.entries if isinstance(m, MultiIndex) else m))
            if len(m) != self.alpha.d or any(v < 0 for v in m):
                raise ParameterDomainError(f"invalid multi-index {m} for d={self.alpha.d}")
            if c != 0:
                clean[m] = clean.get(m, 0.0) + float(c)
        object.__setattr__(self, 'coeffs', dict(sorted(clean.items(), key=lambda kv: (sum(kv[0]), kv[0]))))

    @classmethod
    def basis(cls, alpha: AlphaVector, m: Sequence[int], c: float = 1.0) -> 'SpectralFunction':
        return cls(alpha, {tuple(m): c})

    @classmethod
    def random(cls, alpha: AlphaVector, modes: int, max_length: int, seed: int,
               eps: Optional[EpsVector] = None) -> 'SpectralFunction':
        """``modes`` distinct indices with |m| <= max_length and normal coefficients."""
        rng = np.random.default_rng(seed)
        pool = [m for m in multi_indices(alpha.d, max_length)
                if eps is None or MultiIndex(m).in_parity(eps)]
        picks = rng.choice(len(pool), size=min(modes, len(pool)), replace=False)
        return cls(alpha, {pool[k]: float(rng.standard_normal()) for k in sorted(picks)})

    @classmethod
    def spike(cls, alpha: AlphaVector, x0: Sequence[float], n: int) -> 'SpectralFunction':
        """Partial sum of the delta at x0: sum_{|m| <= n} h_m(x0) h_m."""
        x0 = np.asarray(x0, dtype=float)
        return cls(alpha, {m: float(hermite_gen(m, alpha, x0)) for m in multi_indices(alpha.d, n)})

    @property
    def d(self) -> int:
        return self.alpha.d

    @property
    def indices(self) -> np.ndarray:
        return np.array(list(self.coeffs.keys()), dtype=int).reshape(-1, self.d)

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=float)

    @property
    def max_length(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def coefficient(self, m: Sequence[int]) -> float:
        return self.coeffs.get(tuple(m), 0.0)

    def __call__(self, x) -> np.ndarray:
        if not self.coeffs:
            return np.zeros(np.asarray(x).shape[:-1])
        return basis_matrix(self.alpha, self.indices, x) @ self.values

    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.coeffs.values()))

    def restricted_norm(self, eps: EpsVector) -> float:
        """||f_eps^+||_{L^2(dw_alpha^+)} = (2^-d sum_{m in N_eps} c_m^2)^{1/2}."""
        total = sum(c * c for m, c in self.coeffs.items() if MultiIndex(m).in_parity(eps))
        return math.sqrt(total / 2 ** self.d)

    def inner(self, other: 'SpectralFunction') -> float:
        return sum(c * other.coefficient(m) for m, c in self.coeffs.items())

    def map(self, fn: Callable[[Index, float], float]) -> 'SpectralFunction':
        return SpectralFunction(self.alpha, {m: fn(m, c) for m, c in self.coeffs.items()})

    def filter(self, keep: Callable[[Index], bool]) -> 'SpectralFunction':
        return SpectralFunction(self.alpha, {m: c for m, c in self.coeffs.items() if keep(m)})

    def scale(self, factor: float) -> 'SpectralFunction':
        return self.map(lambda m, c: factor * c)

    def __add__(self, other: 'SpectralFunction') -> 'SpectralFunction':
        merged = dict(self.coeffs)
        for m, c in other.coeffs.items():
            merged[m] = merged.get(m, 0.0) + c
        return SpectralFunction(self.alpha, merged)

    def __sub__(self, other: 'SpectralFunction') -> 'SpectralFunction':
        return self + other.scale(-1.0)

    def __mul__(self, factor: float) -> 'SpectralFunction':
        return self.scale(factor)

    __rmul__ = __mul__

    def to_dict(self) -> Dict:
        return {
            'alpha': list(self.alpha.entries),
            'coeffs': [{'m': list(m), 'c': c} for m, c in self.coeffs.items()],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'SpectralFunction':
        alpha = AlphaVector(tuple(data['alpha']))
        return cls(alpha, {tuple(item['m']): item['c'] for item in data.get('coeffs', [])})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> 'SpectralFunction':
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a tensor grid with a spline interpolant of order 1, 3 or 5."""

    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    order: int = 5

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        values = np.asarray(self.values, dtype=float)
        for a in axes:
            if a.ndim != 1 or len(a) < 2 or np.any(np.diff(a) <= 0):
                raise ParameterDomainError("grid axes must be strictly increasing")
        if values.shape != tuple(len(a) for a in axes):
            raise ParameterDomainError(f"values shape {values.shape} does not match the axes")
        if not np.all(np.isfinite(values)):
            raise ParameterDomainError("grid values must be finite")
        if self.order not in INTERPOLATION_METHODS:
            raise ParameterDomainError(f"interpolation order must be 1, 3 or 5, got {self.order}")
        object.__setattr__(self, 'axes', axes)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], axes: Sequence[np.ndarray],
                      order: int = 5) -> 'GridFunction':
        axes = tuple(np.asarray(a, dtype=float) for a in axes)
        return cls(axes, np.asarray(fn(grid_points(axes))), order)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.axes)

    def covers(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.ones(x.shape[:-1], dtype=bool)
        for i, a in enumerate(self.axes):
            inside &= (x[..., i] >= a[0]) & (x[..., i] <= a[-1])
        return inside

    def _interpolator(self) -> RegularGridInterpolator:
        return _grid_interpolator(self)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.all(self.covers(x)):
            raise PreconditionError("evaluation point outside the sampled grid")
        return self._interpolator()(x.reshape(-1, self.d)).reshape(x.shape[:-1])


@lru_cache(maxsize=32)
def _grid_interpolator(grid: GridFunction) -> RegularGridInterpolator:
    return RegularGridInterpolator(grid.axes, grid.values, method=INTERPOLATION_METHODS[grid.order])


def grid_points(axes: Sequence[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack(mesh, axis=-1)


FunctionLike = Union[SpectralFunction, GridFunction, Callable[[np.ndarray], np.ndarray]]


# ---------------------------------------------------------------------------
# Ladder operators and the oscillator


def delta_apply(f: SpectralFunction, j: int) -> SpectralFunction:
    """delta_j h_m = Phi(m_j, alpha_j) h_{m - e_j}."""
    out: Dict[Index, float] = {}
    for m, c in f.coeffs.items():
        if m[j] == 0:
            continue
        target = m[:j] + (m[j] - 1,) + m[j + 1:]
        out[target] = out.get(target, 0.0) + phi_factor(m[j], f.alpha[j]) * c
    return SpectralFunction(f.alpha, out)


def delta_star_apply(f: SpectralFunction, j: int) -> SpectralFunction:
    """delta_j^* h_m = Phi(m_j + 1, alpha_j) h_{m + e_j} (adjoint of delta_apply)."""
    out: Dict[Index, float] = {}
    for m, c in f.coeffs.items():
        target = m[:j] + (m[j] + 1,) + m[j + 1:]
        out[target] = out.get(target, 0.0) + phi_factor(m[j] + 1, f.alpha[j]) * c
    return SpectralFunction(f.alpha, out)


def oscillator_apply(f: SpectralFunction) -> SpectralFunction:
    return f.map(lambda m, c: eigenvalue(sum(m), f.alpha) * c)


def factorized_oscillator(f: SpectralFunction) -> SpectralFunction:
    """(1/2) sum_j (delta_j^* delta_j + delta_j delta_j^*) f."""
    total = SpectralFunction(f.alpha)
    for j in range(f.d):
        total = total + delta_star_apply(delta_apply(f, j), j) + delta_apply(delta_star_apply(f, j), j)
    return total.scale(0.5)


def dunkl_derivative(f: FunctionLike, j: int, x, alpha: Optional[AlphaVector] = None,
                     step: float = 1e-4) -> np.ndarray:
    """T_j^alpha f(x) = d_j f(x) + (alpha_j + 1/2)(f(x) - f(sigma_j x)) / x_j.

    Exact for spectral f (T_j = delta_j - x_j).  Otherwise a centered
    difference; at x_j = 0 the limit (2 alpha_j + 2) d_j f(x) is used.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(f, SpectralFunction):
        return delta_apply(f, j)(x) - x[..., j] * f(x)
    if alpha is None:
        raise ParameterDomainError("grid Dunkl derivative needs alpha")
    e = np.zeros(x.shape[-1])
    e[j] = step
    mirrored = x.copy()
    mirrored[..., j] = -mirrored[..., j]
    probes = [x + e, x - e, mirrored]
    if isinstance(f, GridFunction):
        for p in probes:
            if not np.all(f.covers(p)):
                raise PreconditionError("no negative-side stencil: grid does not contain sigma_j x")
    derivative = (f(x + e) - f(x - e)) / (2.0 * step)
    xj = x[..., j]
    near_zero = np.abs(xj) < step
    safe = np.where(near_zero, 1.0, xj)
    reflection = (alpha[j] + 0.5) * (f(x) - f(mirrored)) / safe
    return np.where(near_zero, (2.0 * alpha[j] + 2.0) * derivative, derivative + reflection)


# ---------------------------------------------------------------------------
# Semigroups


def _spectral_semigroup(f: SpectralFunction, multiplier: Callable[[float], float],
                        eps: Optional[EpsVector], restricted: bool) -> SpectralFunction:
    if restricted and eps is None:
        raise ParameterDomainError("the orthant semigroup needs an eps component")
    factor = 2.0 ** -f.d if restricted else 1.0
    out = {}
    for m, c in f.coeffs.items():
        if eps is not None and not MultiIndex(m).in_parity(eps):
            continue
        out[m] = factor * multiplier(eigenvalue(sum(m), f.alpha)) * c
    return SpectralFunction(f.alpha, out)


def heat_apply(f: FunctionLike, t: float, eps: Optional[EpsVector] = None, restricted: bool = False,
               alpha: Optional[AlphaVector] = None, points=None,
               cfg: KernelEvalConfig = KernelEvalConfig(), nodes: int = GRID_QUAD_NODES):
    """T_t f, its eps component T_t^eps f, or the orthant semigroup T_t^{eps,+} f^+.

    Spectral f returns a SpectralFunction (the orthant result as an expansion
    whose restriction to R^d_+ is T_t^{eps,+} f_eps^+).  A GridFunction returns
    a GridFunction on the same axes; other callables return values at ``points``.
    """
    if t < 0:
        raise ParameterDomainError(f"t must be >= 0, got {t}")
    if isinstance(f, SpectralFunction):
        return _spectral_semigroup(f, lambda lam: math.exp(-t * lam), eps, restricted)
    if alpha is None:
        raise ParameterDomainError("grid semigroups need alpha")
    if isinstance(f, GridFunction):
        values = heat_apply_grid(f, t, alpha, f.points, eps, restricted, cfg, nodes)
        return GridFunction(f.axes, values, f.order)
    return heat_apply_grid(f, t, alpha, points, eps, restricted, cfg, nodes)


def sign_power(signs: np.ndarray, eps: EpsVector) -> np.ndarray:
    return np.prod(np.power(signs, eps.as_array()), axis=-1)


def parity_part(f: Callable, y: np.ndarray, eps: EpsVector) -> np.ndarray:
    """sum_eta eta^eps f(eta y) = 2^d f_eps(y)."""
    total = np.zeros(y.shape[:-1])
    for eta in EpsVector.all(y.shape[-1]):
        signs = 1.0 - 2.0 * eta.as_array()
        total = total + sign_power(signs, eps) * f(y * signs)
    return total


def heat_apply_grid(f: Callable, t: float, alpha: AlphaVector, points, eps: Optional[EpsVector] = None,
                    restricted: bool = False, cfg: KernelEvalConfig = KernelEvalConfig(),
                    nodes: int = GRID_QUAD_NODES) -> np.ndarray:
    """Kernel quadrature of T_t f at ``points`` using orthant Gauss-Laguerre nodes and parity extension."""
    x = np.asarray(points, dtype=float)
    if t == 0:
        return np.asarray(f(x), dtype=float)
    y, w = orthant_rule(alpha, nodes)
    zeta = math.tanh(t)
    if restricted:
        if eps is None:
            raise ParameterDomainError("the orthant semigroup needs an eps component")
        if np.any(x < 0):
            raise PreconditionError("orthant semigroup is evaluated on R^d_+ only")
        kernel = component_values('none', x[..., None, :], y, zeta, alpha, eps, cfg)
        return kernel @ (w * f(y))
    signs = np.where(x < 0, -1.0, 1.0)
    total = np.zeros(x.shape[:-1])
    for e in ([eps] if eps is not None else EpsVector.all(alpha.d)):
        kernel = component_values('none', np.abs(x)[..., None, :], y, zeta, alpha, e, cfg)
        total = total + sign_power(signs, e) * (kernel @ (w * parity_part(f, y, e)))
    return total


@lru_cache(maxsize=16)
def _laguerre_half_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    u, w = roots_genlaguerre(n, -0.5)
    return u, w


def subordinate(lam, t: float, method: str = 'trapezoid', nodes: int = SUBORDINATION_NODES) -> np.ndarray:
    """int_0^inf e^{-t^2 lam/(4u)} e^{-u} du / sqrt(pi u), which equals e^{-t sqrt(lam)}.

    'trapezoid' uses u = e^s and a fine trapezoid rule (double-exponential
    decay at both ends); 'laguerre' uses generalized Gauss-Laguerre with
    weight u^{-1/2} e^{-u}.
    """
    lam = np.asarray(lam, dtype=float)
    if t == 0:
        return np.ones_like(lam)
    a = t * t * lam / 4.0
    if method == 'laguerre':
        u, w = _laguerre_half_rule(nodes)
        return np.exp(-a[..., None] / u) @ w / math.sqrt(math.pi)
    if method != 'trapezoid':
        raise ParameterDomainError(f"unknown subordination method {method!r}")
    lo = math.log(max(float(np.min(a)), 1e-300)) - 4.5
    lo = max(lo, -60.0)
    hi = math.log(40.0)
    h = 0.02
    s = np.arange(lo, hi + h, h)
    integrand = np.exp(-a[..., None] * np.exp(-s) - np.exp(s) + s / 2.0)
    return h * integrand.sum(axis=-1) / math.sqrt(math.pi)


def spectral_projection(f: Callable, alpha: AlphaVector, max_length: int = GRID_PROJECTION_LENGTH,
                        nodes: int = GRID_QUAD_NODES) -> SpectralFunction:
    """Coefficients <f, h_m> for |m| <= max_length by the full-space Gauss rule.

    Exact for expansions of length <= max_length; ``f`` is sampled at nodes
    out to about sqrt(4 * nodes), so a GridFunction must cover them.
    """
    if isinstance(f, SpectralFunction):
        return f
    y, w = full_rule(alpha, nodes)
    indices = np.array(multi_indices(alpha.d, max_length), dtype=int).reshape(-1, alpha.d)
    coeffs = (w * np.asarray(f(y), dtype=float)) @ basis_matrix(alpha, indices, y)
    return SpectralFunction(alpha, {tuple(m): float(c) for m, c in zip(indices, coeffs)})


def poisson_apply(f: FunctionLike, t: float, eps: Optional[EpsVector] = None, restricted: bool = False,
                  method: str = 'spectral', alpha: Optional[AlphaVector] = None, points=None):
    """P_t f = e^{-t sqrt(L)} f, by the spectral multiplier or by subordination."""
    if t < 0:
        raise ParameterDomainError(f"t must be >= 0, got {t}")
    if isinstance(f, SpectralFunction):
        if method == 'spectral':
            return _spectral_semigroup(f, lambda lam: math.exp(-t * math.sqrt(lam)), eps, restricted)
        result = _spectral_semigroup(f, lambda lam: float(subordinate(lam, t, method)), eps, restricted)
        exact = _spectral_semigroup(f, lambda lam: math.exp(-t * math.sqrt(lam)), eps, restricted)
        gap = (result - exact).norm()
        if gap > SUBORDINATION_TOL * max(exact.norm(), 1e-300):
            logger.warning(f"Subordination ({method}) differs from the multiplier by {gap:.2e}")
        return result
    if alpha is None:
        raise ParameterDomainError("grid semigroups need alpha")
    # grid path: project onto h_m, then the same multiplier as above
    x = f.points if isinstance(f, GridFunction) else np.asarray(points, dtype=float)
    if restricted and np.any(x < 0):
        raise PreconditionError("orthant semigroup is evaluated on R^d_+ only")
    values = poisson_apply(spectral_projection(f, alpha), t, eps, restricted, method)(x)
    if isinstance(f, GridFunction):
        return GridFunction(f.axes, values, f.order)
    return values
