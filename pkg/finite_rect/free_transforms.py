from __future__ import annotations

from dataclasses import dataclass

import jax
import jax.numpy as jnp
from jaxtyping import Array, Float

from finite_rect.errors import DomainError, UsageError
from finite_rect.poly import NonnegPoly, RectParams, power_sums, roots
from finite_rect.series import (TruncSeries, ts_comp_inverse, ts_mul, ts_reciprocal, ts_scale, ts_shift,
                                ts_sqrt)

EDGE_MAX_ITER = 10_000
J_MAX_ITER = 200
J_MAX_DOUBLINGS = 2_000


@dataclass(frozen=True, eq=False)
class SymmetricMoments:
    even_moments: Float[Array, "K+1"]  # m_{2k} of the symmetrized root measure, m_0 = 1

    def __post_init__(self):
        if float(self.even_moments[0]) != 1.0:
            raise DomainError(f"m_0 must be 1, got {float(self.even_moments[0])}")

    @property
    def K(self) -> int:
        return int(self.even_moments.shape[0]) - 1

    def series(self, order: int) -> TruncSeries:
        """S(x) = sum_k m_{2k} x^k mod x^order."""
        if self.K + 1 < order:
            raise UsageError(f"order {order} needs moments up to m_{2 * (order - 1)}, have m_{2 * self.K}")
        return TruncSeries.of(self.even_moments[:order], order)


def symmetric_moments(p: NonnegPoly, K: int) -> SymmetricMoments:
    """Even moments of the measure on +-sqrt(roots of p): m_{2k} = (1/d) sum_i lambda_i^k."""
    if K < 0:
        raise UsageError(f"K must be nonnegative, got {K}")
    if p.degree == 0:
        raise DomainError("a constant polynomial has no root measure")
    if K == 0:
        return SymmetricMoments(jnp.ones(1))
    return SymmetricMoments(jnp.concatenate([jnp.ones(1), power_sums(p, K) / p.degree]))


def _check_lam(lam: float):
    if not 0.0 < lam <= 1.0:
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")


@jax.jit
def _newton_from_above(coeffs: jnp.ndarray, x0: jnp.ndarray) -> jnp.ndarray:
    dcoeffs = jnp.polyder(coeffs)

    def cond(state):
        x, step, it = state
        return (step > 1e-15 * (1.0 + x)) & (it < EDGE_MAX_ITER)

    def body(state):
        x, _, it = state
        px, dpx = jnp.polyval(coeffs, x), jnp.polyval(dcoeffs, x)
        step = jnp.where((px > 0.0) & (dpx > 0.0), px / dpx, 0.0)
        # p and p' are nonnegative above the largest root only; a step landing elsewhere crossed
        # it and is dropped, unless p is rounding noise there, i.e. the step reached the root
        nxt = x - step
        pn = jnp.polyval(coeffs, nxt)
        noise = 8.0 * jnp.finfo(coeffs.dtype).eps * jnp.polyval(jnp.abs(coeffs), jnp.abs(nxt))
        keep = ((pn >= 0.0) & (jnp.polyval(dcoeffs, nxt) >= 0.0)) | (jnp.abs(pn) <= noise)
        step = jnp.where(keep, step, 0.0)
        return x - step, step, it + 1

    x, _, _ = jax.lax.while_loop(cond, body, (x0, jnp.array(jnp.inf), jnp.array(0)))
    return x


def spectral_edge(p: NonnegPoly) -> float:
    """
    Largest root of p by Newton's method started at the sum of the roots.

    From above the largest root of a real-rooted polynomial Newton iterates decrease
    monotonically, also when that root is repeated (p^n of a stacked block matrix), where
    the companion-matrix eigenvalues scatter into the complex plane.
    """
    if p.degree == 0:
        raise DomainError("a constant polynomial has no roots")
    x0 = float(p.alternating()[1])
    if x0 <= 0.0:
        return 0.0
    return max(float(_newton_from_above(p.coeffs, jnp.array(x0))), 0.0)


def _G(coeffs: jnp.ndarray, x):
    d = coeffs.shape[0] - 1
    x2 = x * x
    return x * jnp.polyval(jnp.polyder(coeffs), x2) / (d * jnp.polyval(coeffs, x2))


def _H(coeffs: jnp.ndarray, lam, x):
    g = _G(coeffs, x)
    return g * (lam * g + (1.0 - lam) / x)


def _check_outside(p: NonnegPoly, x: float) -> float:
    edge = jnp.sqrt(spectral_edge(p))
    if not x > edge:
        raise DomainError(f"x={x} must exceed the largest symmetrized root {float(edge)}")
    return float(edge)


def cauchy_G_eval(p: NonnegPoly, x: float) -> float:
    """G of the symmetrized root measure at x, as x p'(x^2) / (d p(x^2))."""
    _check_outside(p, x)
    return float(_G(p.coeffs, x))


def cauchy_G_atoms(p: NonnegPoly, x: float) -> float:
    """Same value as cauchy_G_eval, summed over the 2d atoms +-sqrt(lambda_i)."""
    _check_outside(p, x)
    r = jnp.sqrt(roots(p).roots)
    return float(jnp.sum(1.0 / (x - r) + 1.0 / (x + r)) / (2 * p.degree))


def rect_H_eval(p: NonnegPoly, params: RectParams, x: float) -> float:
    """H(x) = G(x) (lambda G(x) + (1 - lambda) / x) for the symmetrized root measure."""
    _check_outside(p, x)
    return float(_H(p.coeffs, params.lam, x))


@jax.jit
def _solve_J(coeffs, lam, u, lo, hi):
    h = lambda x: _H(coeffs, lam, x) - u
    dh = jax.grad(h)

    def cond(state):
        lo, hi, x, it = state
        return (hi - lo > 1e-15 * hi) & (jnp.abs(h(x)) > 1e-14 * (1.0 + u)) & (it < J_MAX_ITER)

    def body(state):
        lo, hi, x, it = state
        # H is decreasing: positive residual means x is left of the root
        hx = h(x)
        lo = jnp.where(hx > 0.0, x, lo)
        hi = jnp.where(hx > 0.0, hi, x)
        newton = x - hx / dh(x)
        ok = (newton > lo) & (newton < hi) & jnp.isfinite(newton)
        return lo, hi, jnp.where(ok, newton, 0.5 * (lo + hi)), it + 1

    _, _, x, _ = jax.lax.while_loop(cond, body, (lo, hi, 0.5 * (lo + hi), jnp.array(0)))
    return x


def J_eval(p: NonnegPoly, params: RectParams, u: float) -> float:
    """
    The x above the spectrum with rect_H_eval(p, params, x) = u.

    Bisection on a bracket [sqrt(edge) + eps, X_hi], X_hi doubled until H(X_hi) < u,
    refined with Newton steps that stay inside the bracket.
    """
    if not u > 0.0:
        raise DomainError(f"J is defined for u > 0, got {u}")
    lam = params.lam
    H = lambda x: float(_H(p.coeffs, lam, x))
    edge = float(jnp.sqrt(spectral_edge(p)))
    lo = edge + 1e-12 * (1.0 + edge)
    hi = max(2.0 * lo, 1.0)
    for _ in range(J_MAX_DOUBLINGS):
        if H(hi) < u:
            break
        hi *= 2.0
    else:
        raise DomainError(f"could not bracket J({u})")
    # next to a repeated root H(lo) is rounding noise; walk lo up until it is trustworthy
    for _ in range(J_MAX_ITER):
        if H(lo) > u:
            break
        mid = 0.5 * (lo + hi)
        if H(mid) > u:
            lo = mid
            break
        hi = mid
    else:
        raise DomainError(f"u={u} lies outside the range of H above the spectrum")
    return float(_solve_J(p.coeffs, lam, u, jnp.array(lo), jnp.array(hi)))


def rect_H_series(mom: SymmetricMoments, lam: float, order: int) -> TruncSeries:
    """
    Rectangular Cauchy transform as a series in x: H(x) = x (lambda S(x)^2 + (1 - lambda) S(x)).
    Args:
        mom: SymmetricMoments with at least order - 1 entries
        lam: ratio d/m in (0, 1]
        order: number of coefficients, x^0 .. x^(order-1)
    Returns:
        TruncSeries with H_0 = 0 and H_1 = 1
    """
    _check_lam(lam)
    if order < 2:
        raise UsageError(f"H series needs order >= 2, got {order}")
    s = mom.series(order - 1).truncate(order)
    inner = ts_scale(ts_mul(s, s), lam) + ts_scale(s, 1.0 - lam)
    h = ts_shift(inner, 1)
    # m_0 = 1 forces H_1 = lambda + (1 - lambda); pin it against rounding
    return TruncSeries.of(h.coeffs.at[1].set(1.0), order)


def free_rect_R_series(mom: SymmetricMoments, lam: float, order: int) -> TruncSeries:
    """
    Free rectangular R-transform U(x / H^{-1}(x) - 1) mod x^order, with
    U(v) = (sqrt((lambda + 1)^2 + 4 lambda v) - lambda - 1) / (2 lambda).
    Needs moments up to m_{2(order-1)}.
    """
    _check_lam(lam)
    if order < 1:
        raise UsageError(f"order must be positive, got {order}")
    h_inv = ts_comp_inverse(rect_H_series(mom, lam, order + 1))
    # h_inv / x has order valid coefficients
    quotient = ts_reciprocal(ts_shift(h_inv, -1).truncate(order))
    v = quotient - TruncSeries.constant(1.0, order)
    radicand = ts_scale(v, 4.0 * lam) + TruncSeries.constant((lam + 1.0) ** 2, order)
    r = ts_scale(ts_sqrt(radicand) - TruncSeries.constant(lam + 1.0, order), 1.0 / (2.0 * lam))
    return TruncSeries.of(r.coeffs.at[0].set(0.0), order)


def free_rect_R_eval(p: NonnegPoly, params: RectParams, s: float) -> float:
    """R(s^2) = -(lambda + 1) / (2 lambda) + sqrt((lambda - 1)^2 / (4 lambda^2) + s^2 J(s^2)^2 / lambda)."""
    if s == 0.0:
        raise DomainError("free R pointwise form needs s != 0")
    lam = params.lam
    u = s * s
    j = J_eval(p, params, u)
    return float(-(lam + 1.0) / (2.0 * lam) + jnp.sqrt((lam - 1.0) ** 2 / (4.0 * lam ** 2) + u * j * j / lam))
