"""Weighted measures, cube volumes, the cone weight factor, Pi_beta rules and A_p estimates."""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, roots_genlaguerre, roots_jacobi, roots_legendre

from src.config import logger
from src.models import AlphaVector, BallSpec, ConeSpec, DataError, ParameterDomainError

POINT_MASS_WEIGHT = 1.0 / math.sqrt(2.0 * math.pi)


def density(x: np.ndarray, alpha: AlphaVector) -> np.ndarray:
    """prod_j |x_j|^{2 alpha_j + 1}; exponent 0 gives 1 even at x_j = 0."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.ones(x.shape[:-1])
    for j, a in enumerate(alpha):
        out = out * np.power(x[..., j], 2.0 * a + 1.0)
    return out


@dataclass(frozen=True)
class WeightedMeasure:
    """w_alpha on R^d, or w_alpha^+ on the positive orthant when ``restricted``."""

    alpha: AlphaVector
    restricted: bool = False

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = density(x, self.alpha)
        if self.restricted:
            value = np.where(self.contains(x), value, 0.0)
        return value

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.restricted:
            return np.ones(x.shape[:-1], dtype=bool)
        return np.all(x >= 0, axis=-1)

    def rule(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Gauss rule for int g dw (or dw^+), exact when g e^{|x|^2} is a polynomial of low degree."""
        if self.restricted:
            return orthant_rule(self.alpha, n)
        return full_rule(self.alpha, n)


def _check_t(t) -> None:
    if np.any(np.asarray(t) <= 0):
        raise ParameterDomainError("cube side t must be positive")


def v_plus(xj, t, aj: float):
    """w_{alpha_j}^+((x_j - t, x_j + t) intersected with [0, inf))."""
    _check_t(t)
    xj = np.asarray(xj, dtype=float)
    t = np.asarray(t, dtype=float)
    p = 2.0 * aj + 2.0
    lower = np.power(np.maximum(xj - t, 0.0), p)
    value = (np.power(xj + t, p) - lower) / p
    return float(value) if value.ndim == 0 else value


def v_plus_cube(x, t, alpha: AlphaVector):
    """V_t^{alpha,+}(x) = prod_j v_plus(x_j, t, alpha_j) for x of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    value = np.ones(x.shape[:-1])
    for j, a in enumerate(alpha):
        value = value * v_plus(x[..., j], t, a)
    return float(value) if np.ndim(value) == 0 else value


def _signed_power_primitive(s, p):
    return np.sign(s) * np.power(np.abs(s), p) / p


def v_full(xj, t, aj: float):
    """w_{alpha_j}((x_j - t, x_j + t)) on the whole line."""
    _check_t(t)
    p = 2.0 * aj + 2.0
    xj = np.asarray(xj, dtype=float)
    value = _signed_power_primitive(xj + t, p) - _signed_power_primitive(xj - t, p)
    return float(value) if np.ndim(value) == 0 else value


def v_full_cube(x, t, alpha: AlphaVector):
    """V_t^alpha(x): full-space cube volume."""
    x = np.asarray(x, dtype=float)
    value = np.ones(x.shape[:-1])
    for j, a in enumerate(alpha):
        value = value * v_full(x[..., j], t, a)
    return float(value) if np.ndim(value) == 0 else value


def comparability_ratio(x, t, alpha: AlphaVector):
    """V_t^{alpha,+}(x) / (t^d prod (x_j + t)^{2 alpha_j + 1})."""
    x = np.asarray(x, dtype=float)
    ref = np.power(t, alpha.d) * density(x + t, alpha)
    return v_plus_cube(x, t, alpha) / ref


def phi_alpha(x, z, t, alpha: AlphaVector):
    """prod (x_j+z_j)^{2alpha_j+1} / V_{sqrt t}^{alpha,+}(x), zero when x+z leaves the closed orthant."""
    x = np.asarray(x, dtype=float)
    y = x + np.asarray(z, dtype=float)
    inside = np.all(y >= 0, axis=-1)
    num = density(np.where(y >= 0, y, 0.0), alpha)
    value = np.where(inside, num / v_plus_cube(x, np.sqrt(t), alpha), 0.0)
    return float(value) if np.ndim(value) == 0 else value


def phi_alpha_full(x, z, t, alpha: AlphaVector):
    """w_alpha(x+z) / V_{sqrt t}^alpha(x), the full-space cone weight."""
    x = np.asarray(x, dtype=float)
    y = x + np.asarray(z, dtype=float)
    value = density(y, alpha) / v_full_cube(x, np.sqrt(t), alpha)
    return float(value) if np.ndim(value) == 0 else value


def phi_alpha_log_bound(alpha: AlphaVector, xs: np.ndarray, ts: np.ndarray, cone: ConeSpec) -> float:
    """Finite-grid sup of phi_alpha(x,z,t) * log((1+zeta)/(1-zeta))^{d/2} over the cone."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    best = 0.0
    for x in xs:
        for t in np.asarray(ts, dtype=float):
            pts, _ = ball_quadrature(np.zeros(alpha.d), cone.beta, cone.points,
                                     lower=-x / math.sqrt(t))
            z = pts * math.sqrt(t)
            # log((1+zeta)/(1-zeta)) = 2t
            value = phi_alpha(x, z, t, alpha) * (2.0 * t) ** (alpha.d / 2.0)
            best = max(best, float(np.max(value)))
    return best


@dataclass(frozen=True)
class PiBetaRule:
    """Tensor Gauss-Jacobi rule for Pi_beta on [-1,1]^d."""

    beta: Tuple[float, ...]
    nodes: Tuple[np.ndarray, ...]
    weights: Tuple[np.ndarray, ...]
    point_mass: Tuple[bool, ...]

    def mass(self) -> np.ndarray:
        return np.array([w.sum() for w in self.weights])

    def tensor(self) -> Tuple[np.ndarray, np.ndarray]:
        """All tensor nodes (N, d) with their product weights (N,)."""
        grids = np.meshgrid(*self.nodes, indexing='ij')
        points = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*self.weights, indexing='ij')
        weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        return points, weights


def pi_beta_total_mass(beta: float) -> float:
    return math.exp(-beta * math.log(2.0) - gammaln(beta + 1.0))


@lru_cache(maxsize=512)
def pi_beta_rule_1d(beta: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for Pi_beta on [-1,1]; two point masses at beta = -1/2."""
    if beta < -0.5:
        raise ParameterDomainError(f"Pi_beta needs beta >= -1/2, got {beta}")
    if n < 1:
        raise ParameterDomainError("Pi_beta rule needs at least one node")
    if beta == -0.5:
        nodes = np.array([-1.0, 1.0])
        weights = np.array([POINT_MASS_WEIGHT, POINT_MASS_WEIGHT])
    else:
        nodes, weights = roots_jacobi(n, beta - 0.5, beta - 0.5)
        scale = math.exp(-0.5 * math.log(math.pi) - beta * math.log(2.0) - gammaln(beta + 0.5))
        weights = weights * scale
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def pi_beta_rule(beta: Sequence[float], n: int) -> PiBetaRule:
    beta = tuple(float(b) for b in beta)
    rules = [pi_beta_rule_1d(b, n) for b in beta]
    return PiBetaRule(beta, tuple(r[0] for r in rules), tuple(r[1] for r in rules),
                      tuple(b == -0.5 for b in beta))


@lru_cache(maxsize=64)
def legendre_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _ball_nodes(center: Sequence[float], radius: float, n: int,
                lower: np.ndarray, upper: np.ndarray, dims: int):
    """Nested sine-substituted Gauss-Legendre over the first ``dims`` coordinates of a ball.

    ``lower``/``upper`` have shape (B, d): one box cut per batch entry.  Returns
    points (B, N, dims), weights (B, N) and the remaining chord radius (B, N).
    """
    x, w = legendre_rule(n)
    batch = lower.shape[0]
    pts = np.zeros((batch, 1, 0))
    wts = np.ones((batch, 1))
    rad = np.full((batch, 1), float(radius))
    for i in range(dims):
        c = center[i]
        lo = lower[:, i:i + 1]
        hi = upper[:, i:i + 1]
        safe = np.where(rad > 0, rad, 1.0)
        a = np.clip((np.maximum(lo, c - rad) - c) / safe, -1.0, 1.0)
        b = np.clip((np.minimum(hi, c + rad) - c) / safe, -1.0, 1.0)
        ta, tb = np.arcsin(a), np.arcsin(b)
        half = np.where((tb > ta) & (rad > 0), (tb - ta) / 2.0, 0.0)
        theta = ((ta + tb) / 2.0)[..., None] + half[..., None] * x
        s = c + rad[..., None] * np.sin(theta)
        jac = rad[..., None] * np.cos(theta) * half[..., None] * w
        count = pts.shape[1]
        pts = np.concatenate([np.repeat(pts, n, axis=1), s.reshape(batch, count * n, 1)], axis=2)
        wts = (wts[..., None] * jac).reshape(batch, count * n)
        rad = (rad[..., None] * np.cos(theta)).reshape(batch, count * n)
    return pts, wts, np.maximum(rad, 0.0)


def ball_quadrature_batch(center: Sequence[float], radius: float, n: int,
                          lower: np.ndarray, upper: Optional[np.ndarray] = None
                          ) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature over B(center, radius) cut to one box per row of ``lower``/``upper`` (shape (B, d))."""
    center = np.asarray(center, dtype=float)
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    upper = np.full_like(lower, np.inf) if upper is None else np.atleast_2d(np.asarray(upper, dtype=float))
    pts, wts, _ = _ball_nodes(center, radius, n, lower, upper, len(center))
    return pts, wts


def ball_quadrature(center: Sequence[float], radius: float, n: int,
                    lower: Optional[Sequence[float]] = None,
                    upper: Optional[Sequence[float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Lebesgue quadrature over the ball B(center, radius) cut to lower <= x <= upper."""
    d = len(center)
    lower = np.full(d, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(d, np.inf) if upper is None else np.asarray(upper, dtype=float)
    pts, wts = ball_quadrature_batch(center, radius, n, lower[None, :], upper[None, :])
    return pts[0], wts[0]


@dataclass(frozen=True)
class BallMeasure:
    value: float
    cube: float
    exact: bool

    @property
    def ratio(self) -> float:
        return self.value / self.cube


def _ball_mass(center: np.ndarray, radius: float, alpha: AlphaVector, n: int) -> float:
    d = alpha.d
    pts, wts, rad = _ball_nodes(center, radius, n, np.zeros((1, d)), np.full((1, d), np.inf), d - 1)
    pts, wts, rad = pts[0], wts[0], rad[0]
    # last coordinate integrated in closed form
    p = 2.0 * alpha[d - 1] + 2.0
    c = center[d - 1]
    hi = np.power(c + rad, p)
    lo = np.power(np.maximum(c - rad, 0.0), p)
    inner = (hi - lo) / p
    outer = np.ones(len(wts))
    for j in range(d - 1):
        outer = outer * np.power(pts[:, j], 2.0 * alpha[j] + 1.0)
    return float(np.sum(wts * outer * inner))


def ball_measure(ball: BallSpec, alpha: AlphaVector, rtol: float = 1e-10) -> BallMeasure:
    """w_alpha^+(B(x, r)) with the cube surrogate V_r^{alpha,+}(x)."""
    if ball.d != alpha.d:
        raise ParameterDomainError("ball and alpha dimensions differ")
    center = np.asarray(ball.center)
    cube = v_plus_cube(center, ball.radius, alpha)
    if alpha.d == 1:
        return BallMeasure(v_plus(center[0], ball.radius, alpha[0]), cube, True)
    if alpha.d > 3:
        logger.debug(f"Ball measure for d={alpha.d} uses the cube surrogate")
        return BallMeasure(cube, cube, False)
    previous = _ball_mass(center, ball.radius, alpha, 16)
    for n in (32, 64, 128):
        value = _ball_mass(center, ball.radius, alpha, n)
        if abs(value - previous) <= rtol * abs(value):
            break
        previous = value
    return BallMeasure(value, cube, True)


def dyadic_ball_family(d: int, centers: int = 8, min_exp: int = -10, max_exp: int = 4) -> List[BallSpec]:
    """Balls with centers on a log grid in [2^-4, 8]^d and radii 2^min_exp .. 2^max_exp."""
    axis = np.geomspace(2.0 ** -4, 8.0, centers)
    radii = [2.0 ** k for k in range(min_exp, max_exp + 1)]
    return [BallSpec(tuple(c), r) for c in itertools.product(axis, repeat=d) for r in radii]


def doubling_constant(alpha: AlphaVector, balls: Sequence[BallSpec]) -> float:
    """max over the family of w^+(B(x,2r)) / w^+(B(x,r))."""
    worst = 0.0
    for ball in balls:
        small = ball_measure(ball, alpha).value
        big = ball_measure(BallSpec(ball.center, 2.0 * ball.radius), alpha).value
        worst = max(worst, big / small)
    return worst


def ap_constant(weight: Callable[[np.ndarray], np.ndarray], p: float, alpha: AlphaVector,
                balls: Sequence[BallSpec], points: int = 12) -> float:
    """Empirical A_p constant of ``weight`` over a ball family in (R^d_+, dw_alpha^+)."""
    if p < 1:
        raise ParameterDomainError(f"A_p needs p >= 1, got {p}")
    worst = 0.0
    for ball in balls:
        pts, wts = ball_quadrature(ball.center, ball.radius, points, lower=np.zeros(alpha.d))
        mu = wts * density(pts, alpha)
        keep = mu > 0
        pts, mu = pts[keep], mu[keep]
        values = np.asarray(weight(pts), dtype=float)
        if np.any(~np.isfinite(values)) or np.any(values <= 0):
            raise DataError(f"weight must be positive on B({ball.center}, {ball.radius})")
        mass = mu.sum()
        avg = float(np.dot(mu, values) / mass)
        if p == 1:
            ratio = avg / float(values.min())
        else:
            dual = float(np.dot(mu, values ** (-1.0 / (p - 1.0))) / mass)
            ratio = avg * dual ** (p - 1.0)
        worst = max(worst, ratio)
    return worst


@lru_cache(maxsize=64)
def _half_line_rule(a: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # int_0^inf g(y) y^{2a+1} dy with y = sqrt(r)
    r, w = roots_genlaguerre(n, a)
    nodes = np.sqrt(r)
    weights = 0.5 * w * np.exp(r)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _tensor(rules: Sequence[Tuple[np.ndarray, np.ndarray]]) -> Tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*[r[0] for r in rules], indexing='ij')
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return points, weights


def orthant_rule(alpha: AlphaVector, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Laguerre nodes y_i = sqrt(r_i) for integrals against dw_alpha^+."""
    return _tensor([_half_line_rule(a, n) for a in alpha])


def full_rule(alpha: AlphaVector, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Orthant rule mirrored to all of R^d, for integrals against dw_alpha."""
    rules = []
    for a in alpha:
        y, w = _half_line_rule(a, n)
        rules.append((np.concatenate([-y[::-1], y]), np.concatenate([w[::-1], w])))
    return _tensor(rules)


def box_rule(alpha: AlphaVector, n: int = 32, radius: float = 6.0,
             full: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on [0, R]^d (or [-R, R]^d, split at 0) with weights against dw_alpha.

    Unlike the Laguerre rules this one does not assume Gaussian decay, so it
    is used for |g|^p with p != 2 and for level sets.
    """
    x, w = legendre_rule(n)
    half = radius / 2.0 * (x + 1.0)
    weights = radius / 2.0 * w
    rules = []
    for a in alpha:
        mass = weights * np.power(half, 2.0 * a + 1.0)
        if full:
            rules.append((np.concatenate([-half[::-1], half]), np.concatenate([mass[::-1], mass])))
        else:
            rules.append((half, mass))
    return _tensor(rules)
