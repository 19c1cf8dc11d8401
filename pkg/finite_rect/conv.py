from __future__ import annotations

from dataclasses import dataclass
from functools import partial, reduce
from typing import Sequence

import jax
import jax.numpy as jnp
from jaxtyping import Array, Float

from finite_rect.errors import DomainError, UsageError
from finite_rect.poly import NonnegPoly, RectParams, alternating_signs


def _check_degree(p: NonnegPoly, params: RectParams, name: str = "p"):
    if p.degree != params.d:
        raise UsageError(f"{name} has degree {p.degree}, expected d={params.d}")


def identity(params: RectParams) -> NonnegPoly:
    """x^d, the zero element of the convolution."""
    return NonnegPoly(jnp.zeros(params.d + 1).at[0].set(1.0))


@partial(jax.jit, static_argnames=("params",))
def _weights(params: RectParams) -> Float[Array, "d+1 d+1"]:
    """
    W[i, j] = (d-i)!(d-j)! / (d!(d-i-j)!) * (m-i)!(m-j)! / (m!(m-i-j)!), for i + j <= d.

    With a = max(i, j) and b = min(i, j) this is prod_{t<b} (d-a-t)/(d-t) * (m-a-t)/(m-t),
    so row and column 0 are exactly 1. Entries with i + j > d are garbage and get dropped.
    """
    d, m = params.d, params.m
    idx = jnp.arange(d + 1)
    hi = jnp.maximum(idx[:, None], idx[None, :]).astype(jnp.float64)
    lo = jnp.minimum(idx[:, None], idx[None, :])

    def body(t, w):
        factor = (d - hi - t) / (d - t) * (m - hi - t) / (m - t)
        return jnp.where(t < lo, w * factor, w)

    return jax.lax.fori_loop(0, d, body, jnp.ones((d + 1, d + 1)))


@partial(jax.jit, static_argnames=("params",))
def _convolve_alternating(pa: jnp.ndarray, qa: jnp.ndarray, params: RectParams) -> jnp.ndarray:
    idx = jnp.arange(params.d + 1)
    k = idx[:, None] + idx[None, :]
    terms = _weights(params) * pa[:, None] * qa[None, :]
    return jnp.zeros(params.d + 1).at[k].add(terms, mode="drop")


def rect_convolve(p: NonnegPoly, q: NonnegPoly, params: RectParams) -> NonnegPoly:
    """
    Rectangular additive convolution of two degree d polynomials with nonnegative roots.
    Args:
        p: NonnegPoly of degree params.d
        q: NonnegPoly of degree params.d
        params: RectParams (d, m)
    Returns:
        NonnegPoly of degree d whose k-th alternating coefficient is sum_{i+j=k} W[i, j] p_i q_j
    """
    _check_degree(p, params, "p")
    _check_degree(q, params, "q")
    out = _convolve_alternating(p.alternating(), q.alternating(), params)
    return NonnegPoly(out.at[0].set(1.0) * alternating_signs(params.d))


@dataclass(frozen=True, eq=False)
class BivariateRepr:
    """
    p(x, y) = y^(m-d) p(xy), kept as the coefficients c[a] of the monomials x^a y^(a+m-d).
    """
    params: RectParams
    base: NonnegPoly

    def __post_init__(self):
        _check_degree(self.base, self.params, "base")

    def coefficients(self) -> Float[Array, "d+1"]:
        return self.base.coeffs[::-1]

    def evaluate(self, x, y):
        a = jnp.arange(self.params.d + 1)
        delta = self.params.m - self.params.d
        return jnp.sum(self.coefficients() * x ** a * y ** (a + delta))

    def apply_dxdy(self, r: int, normalized: bool = True) -> Float[Array, "d+1"]:
        """
        Coefficients (same monomial layout) of (d/dx d/dy)^r p(x, y).

        normalized divides the t-th application by (d-t)(m-t), so the x^(d-r) coefficient stays
        a ratio of falling factorials instead of a product of factorials.
        """
        if not 0 <= r <= self.params.d:
            raise UsageError(f"derivative order must lie in [0, d], got {r}")
        c = self.coefficients()
        for t in range(r):
            c = _dxdy_step(c, t, self.params, normalized)
        return c


def _dxdy_step(c: jnp.ndarray, t: int, params: RectParams, normalized: bool = True) -> jnp.ndarray:
    # x^a y^(a+delta) -> a (a+delta) x^(a-1) y^(a-1+delta)
    a = jnp.arange(1, c.shape[0])
    shifted = c[1:] * a * (a + params.m - params.d)
    if normalized:
        shifted = shifted / ((params.d - t) * (params.m - t))
    return jnp.zeros_like(c).at[:-1].set(shifted)


def rect_convolve_diffop(p: NonnegPoly, q: NonnegPoly, params: RectParams) -> NonnegPoly:
    """
    Same convolution through the bivariate extensions: the sum over j of (dxdy)^j p(x, y)
    times (dxdy)^(d-j) q at (0, 1), with the factorial normalization folded into the steps.
    """
    _check_degree(p, params, "p")
    _check_degree(q, params, "q")
    d = params.d
    qc = BivariateRepr(params, q).coefficients()
    cur = BivariateRepr(params, p).coefficients()
    out = jnp.zeros(d + 1)
    for j in range(d + 1):
        out = out + qc[d - j] * cur
        if j < d:
            cur = _dxdy_step(cur, j, params)
    return NonnegPoly(out[::-1].at[0].set(1.0))


def laguerre_poly(params: RectParams, sigma2: float) -> NonnegPoly:
    """
    Monic multiple of L_d^(m-d)(x / sigma2): p_i = sigma2^i m! d! / (i! (m-i)! (d-i)!).
    """
    if not sigma2 > 0:
        raise DomainError(f"sigma^2 must be positive, got {sigma2}")
    d, m = params.d, params.m
    i = jnp.arange(1, d + 1)
    ratios = sigma2 * (m - i + 1) * (d - i + 1) / i
    alt = jnp.concatenate([jnp.ones(1), jnp.cumprod(ratios)])
    return NonnegPoly(alt * alternating_signs(d))


def convolve_many(polys: Sequence[NonnegPoly], params: RectParams) -> NonnegPoly:
    """Left fold of rect_convolve; the empty fold is x^d."""
    return reduce(lambda acc, p: rect_convolve(acc, p, params), polys, identity(params))


def convolve_power(p: NonnegPoly, n: int, params: RectParams) -> NonnegPoly:
    """n-fold self convolution by repeated squaring."""
    if n < 0:
        raise UsageError(f"power must be nonnegative, got {n}")
    _check_degree(p, params)
    result, base = identity(params), p
    while n:
        if n & 1:
            result = rect_convolve(result, base, params)
        n >>= 1
        if n:
            base = rect_convolve(base, base, params)
    return result
