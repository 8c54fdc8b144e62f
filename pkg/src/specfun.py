"""Laguerre polynomials, the Bessel ratio I_nu(u)/u^nu and generalized Hermite functions.

Everything here is a pure function of its inputs and accepts numpy arrays
for the spatial arguments.  The generalized Hermite function of order
``a`` and degree ``k`` is

    h_{2j}(x)   = (-1)^j d_{2j,a}   e^{-x^2/2} L_j^a(x^2)
    h_{2j+1}(x) = (-1)^j d_{2j+1,a} e^{-x^2/2} x L_j^{a+1}(x^2)

with positive ``d`` fixed by unit norm in L^2(R, |x|^{2a+1} dx).  The sign
(-1)^j makes the ladder rule delta h_k = Phi(k, a) h_{k-1} hold with a
positive Phi and reproduces the classical Hermite functions at a = -1/2.
"""

import math
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln, roots_genlaguerre

from src.config import BESSEL_SERIES_LIMIT
from src.models import AlphaVector, MultiIndex, ParameterDomainError

ArrayLike = Union[float, np.ndarray]


def laguerre_all(jmax: int, a: float, r: ArrayLike) -> np.ndarray:
    """L_0^a(r), ..., L_jmax^a(r) stacked on a new last axis."""
    if a <= -1:
        raise ParameterDomainError(f"Laguerre order must be > -1, got {a}")
    if jmax < 0:
        return np.zeros(np.shape(r) + (0,))
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape + (jmax + 1,))
    out[..., 0] = 1.0
    if jmax >= 1:
        out[..., 1] = 1.0 + a - r
    # (k+1) L_{k+1} = (2k+1+a-r) L_k - (k+a) L_{k-1}
    for k in range(1, jmax):
        out[..., k + 1] = ((2 * k + 1 + a - r) * out[..., k] - (k + a) * out[..., k - 1]) / (k + 1)
    return out


def laguerre_poly(m: int, a: float, r: ArrayLike) -> ArrayLike:
    """Laguerre polynomial L_m^a(r) by the three-term recurrence in m."""
    if m < 0:
        raise ParameterDomainError(f"Laguerre degree must be >= 0, got {m}")
    value = laguerre_all(m, a, r)[..., m]
    return float(value) if np.ndim(value) == 0 else value


def bessel_i_ratio(nu: float, u: ArrayLike, scaled: bool = False) -> ArrayLike:
    """I_nu(u) / u^nu, regular at u = 0.

    With ``scaled=True`` the result is multiplied by e^{-u}, which keeps large
    arguments finite.  Ascending series below max(BESSEL_SERIES_LIMIT, nu^2/2),
    Hankel asymptotic expansion above.
    """
    if nu < -0.5:
        raise ParameterDomainError(f"Bessel order must be >= -1/2, got {nu}")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ParameterDomainError("Bessel ratio needs u >= 0")
    out = np.empty_like(u)
    limit = max(BESSEL_SERIES_LIMIT, nu * nu / 2.0)
    small = u <= limit
    if np.any(small):
        out[small] = _bessel_ratio_series(nu, u[small], scaled)
    if np.any(~small):
        out[~small] = _bessel_ratio_asymptotic(nu, u[~small], scaled)
    return float(out) if out.ndim == 0 else out


def _bessel_ratio_series(nu: float, u: np.ndarray, scaled: bool) -> np.ndarray:
    quarter = u * u / 4.0
    term = np.full_like(u, math.exp(-nu * math.log(2.0) - gammaln(nu + 1.0)))
    total = term.copy()
    k = 0
    while k < 1000:
        term = term * quarter / ((k + 1) * (k + nu + 1))
        total += term
        k += 1
        if np.all(term <= 1e-17 * total):
            break
    if scaled:
        total *= np.exp(-u)
    return total


def _bessel_ratio_asymptotic(nu: float, u: np.ndarray, scaled: bool) -> np.ndarray:
    mu = 4.0 * nu * nu
    term = np.ones_like(u)
    total = np.ones_like(u)
    active = np.ones(u.shape, dtype=bool)
    for k in range(1, 60):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * u)
        # stop each entry once the series starts to diverge or is negligible
        active &= np.abs(nxt) < np.abs(term)
        if not np.any(active):
            break
        term = np.where(active, nxt, term)
        total = total + np.where(active, nxt, 0.0)
        active &= np.abs(nxt) > 1e-17 * np.abs(total)
    value = total / np.sqrt(2.0 * np.pi * u) * np.exp(-nu * np.log(u))
    if not scaled:
        value = value * np.exp(u)
    return value


def normalizing_const(k: int, a: float) -> float:
    """Positive d_{k,a}: unit norm of the degree-k function in L^2(R, |x|^{2a+1} dx)."""
    if k < 0:
        raise ParameterDomainError(f"degree must be >= 0, got {k}")
    if a < -0.5:
        raise ParameterDomainError(f"alpha must be >= -1/2, got {a}")
    j = k // 2
    # int_0^inf e^{-r} L_j^b(r)^2 r^b dr = Gamma(j+b+1)/j!, b = a (even) or a+1 (odd)
    b = a + (k % 2)
    return math.exp(0.5 * (gammaln(j + 1.0) - gammaln(j + b + 1.0)))


def _normalizing_consts(kmax: int, a: float) -> np.ndarray:
    k = np.arange(kmax + 1)
    j = k // 2
    b = a + (k % 2)
    sign = np.where(j % 2 == 0, 1.0, -1.0)
    return sign * np.exp(0.5 * (gammaln(j + 1.0) - gammaln(j + b + 1.0)))


def hermite_1d_all(kmax: int, a: float, x: ArrayLike, gaussian: bool = True) -> np.ndarray:
    """h_0^a(x), ..., h_kmax^a(x) on a new last axis.

    ``gaussian=False`` drops the factor e^{-x^2/2} (polynomial part only).
    """
    if a < -0.5:
        raise ParameterDomainError(f"alpha must be >= -1/2, got {a}")
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (kmax + 1,))
    if kmax < 0:
        return out
    r = x * x
    even = laguerre_all(kmax // 2, a, r)
    out[..., 0::2] = even
    if kmax >= 1:
        odd = laguerre_all((kmax - 1) // 2, a + 1.0, r)
        out[..., 1::2] = x[..., None] * odd
    out *= _normalizing_consts(kmax, a)
    if gaussian:
        out *= np.exp(-r / 2.0)[..., None]
    return out


def hermite_1d(k: int, a: float, x: ArrayLike, gaussian: bool = True) -> ArrayLike:
    """One-dimensional generalized Hermite function h_k^a(x); zero for k < 0."""
    if k < 0:
        return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
    value = hermite_1d_all(k, a, x, gaussian)[..., k]
    return float(value) if np.ndim(value) == 0 else value


def hermite_gen(m: Union[MultiIndex, Sequence[int]], alpha: AlphaVector, x: ArrayLike) -> ArrayLike:
    """Tensor-product generalized Hermite function h_m^alpha at points x of shape (..., d)."""
    if not isinstance(m, MultiIndex):
        m = MultiIndex(tuple(m))
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != alpha.d:
        raise ParameterDomainError(f"points must have last axis d={alpha.d}")
    if not m.valid:
        value = np.zeros(x.shape[:-1])
        return float(value) if value.ndim == 0 else value
    value = np.ones(x.shape[:-1])
    for i, (mi, ai) in enumerate(zip(m.entries, alpha.entries)):
        value = value * hermite_1d(mi, ai, x[..., i])
    return float(value) if np.ndim(value) == 0 else value


def phi_factor(mj: int, aj: float) -> float:
    """Ladder constant Phi(m_j, alpha_j): sqrt(2m) for even m, sqrt(2m+4a+2) for odd m."""
    if mj < 0:
        raise ParameterDomainError(f"degree must be >= 0, got {mj}")
    if mj % 2 == 0:
        return math.sqrt(2.0 * mj)
    return math.sqrt(2.0 * mj + 4.0 * aj + 2.0)


def delta_hermite_1d(k: int, a: float, x: ArrayLike) -> ArrayLike:
    """delta h_k^a computed from the defining formula, without the ladder rule.

    Even k uses d/dx + x, odd k uses d/dx + x + (2a+1)/x; both reduce to
    e^{-x^2/2} times a polynomial, so x = 0 needs no special care.
    """
    x = np.asarray(x, dtype=float)
    r = x * x
    j = k // 2
    const = (-1.0) ** j * normalizing_const(k, a)
    if k % 2 == 0:
        if j == 0:
            poly = np.zeros_like(x)
        else:
            # d/dx L_j^a(x^2) = -2x L_{j-1}^{a+1}(x^2)
            poly = -2.0 * x * laguerre_poly(j - 1, a + 1.0, r)
    else:
        lag = laguerre_poly(j, a + 1.0, r)
        dlag = -laguerre_poly(j - 1, a + 2.0, r) if j >= 1 else np.zeros_like(x)
        poly = (2.0 * a + 2.0) * lag + 2.0 * r * dlag
    value = const * np.exp(-r / 2.0) * poly
    return float(value) if np.ndim(value) == 0 else value


def classical_hermite_functions(nmax: int, x: ArrayLike) -> np.ndarray:
    """Classical Hermite functions psi_0..psi_nmax by their own three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (nmax + 1,))
    out[..., 0] = math.pi ** -0.25 * np.exp(-x * x / 2.0)
    if nmax >= 1:
        out[..., 1] = math.sqrt(2.0) * x * out[..., 0]
    for n in range(1, nmax):
        out[..., n + 1] = (math.sqrt(2.0 / (n + 1)) * x * out[..., n]
                           - math.sqrt(n / (n + 1.0)) * out[..., n - 1])
    return out


@lru_cache(maxsize=128)
def symmetric_gauss_rule(a: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on R for int g(x) e^{-x^2} |x|^{2a+1} dx, exact for polynomial g of degree < 4n.

    Built from generalized Gauss-Laguerre in r = x^2 with the two signs x = +-sqrt(r).
    """
    r, w = roots_genlaguerre(n, a)
    root = np.sqrt(r)
    nodes = np.concatenate([-root[::-1], root])
    weights = np.concatenate([w[::-1], w]) / 2.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gram_1d(kmax: int, a: float) -> np.ndarray:
    """Gram matrix <h_k, h_l> in L^2(R, |x|^{2a+1} dx) for k, l <= kmax."""
    nodes, weights = symmetric_gauss_rule(a, kmax + 2)
    poly = hermite_1d_all(kmax, a, nodes, gaussian=False)
    return np.einsum('i,ik,il->kl', weights, poly, poly)


def orthonormality_defect(alpha: AlphaVector, max_length: int) -> float:
    """max |<h_m, h_n> - delta_mn| over |m|, |n| <= max_length."""
    from src.models import multi_indices

    grams = [gram_1d(max_length, a) for a in alpha]
    index = np.array(multi_indices(alpha.d, max_length))
    gram = np.ones((len(index), len(index)))
    for i in range(alpha.d):
        gram = gram * grams[i][np.ix_(index[:, i], index[:, i])]
    return float(np.max(np.abs(gram - np.eye(len(index)))))
