from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import jax
import jax.numpy as jnp
from jaxtyping import Array, Float

from finite_rect.errors import DomainError, SingularSeriesError, UsageError

_HIGHEST = jax.lax.Precision.HIGHEST


@partial(jax.tree_util.register_dataclass,
         data_fields=['coeffs'],
         meta_fields=['order'])
@dataclass(frozen=True)
class TruncSeries:
    coeffs: Float[Array, "order"]  # coefficient of s^i at index i
    order: int                     # coefficients kept for s^0 .. s^(order-1)

    @classmethod
    def of(cls, coeffs, order: int | None = None) -> TruncSeries:
        """
        Build a series from a coefficient sequence, padding with zeros or truncating mod s^order.
        """
        c = jnp.ravel(jnp.asarray(coeffs, dtype=jnp.float64))
        order = c.shape[0] if order is None else int(order)
        if order < 1:
            raise UsageError(f"series order must be positive, got {order}")
        if c.shape[0] < order:
            c = jnp.pad(c, (0, order - c.shape[0]))
        c = c[:order]
        if not bool(jnp.all(jnp.isfinite(c))):
            raise DomainError("series coefficients must be finite")
        return cls(c, order)

    @classmethod
    def zeros(cls, order: int) -> TruncSeries:
        return cls.of(jnp.zeros(order), order)

    @classmethod
    def constant(cls, value: float, order: int) -> TruncSeries:
        return cls.of(jnp.zeros(order).at[0].set(value), order)

    @classmethod
    def identity(cls, order: int) -> TruncSeries:
        """The series s (just 0 when order is 1)."""
        return cls.of(jnp.zeros(order).at[1:2].set(1.0), order)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __add__(self, other: TruncSeries) -> TruncSeries:
        return ts_add(self, other)

    def __sub__(self, other: TruncSeries) -> TruncSeries:
        return ts_add(self, ts_scale(other, -1.0))

    def __neg__(self) -> TruncSeries:
        return ts_scale(self, -1.0)

    def __mul__(self, other: TruncSeries) -> TruncSeries:
        return ts_mul(self, other)

    def evaluate(self, x):
        return jnp.polyval(self.coeffs[::-1], x)

    def truncate(self, order: int) -> TruncSeries:
        return TruncSeries.of(self.coeffs, order)


def _check_orders(a: TruncSeries, b: TruncSeries):
    if a.order != b.order:
        raise UsageError(f"series orders differ: {a.order} != {b.order}")


def _mul(x: jnp.ndarray, y: jnp.ndarray) -> jnp.ndarray:
    return jnp.convolve(x, y, precision=_HIGHEST)[:x.shape[0]]


def _newton_steps(order: int) -> int:
    # valid coefficients double per step, one more pass to settle rounding
    return max(1, math.ceil(math.log2(max(order, 2)))) + 1


def _reciprocal(c: jnp.ndarray) -> jnp.ndarray:
    inv = jnp.zeros_like(c).at[0].set(1.0 / c[0])
    two = jnp.zeros_like(c).at[0].set(2.0)
    for _ in range(_newton_steps(c.shape[0])):
        inv = _mul(inv, two - _mul(c, inv))
    return inv


def _derive(c: jnp.ndarray) -> jnp.ndarray:
    n = c.shape[0]
    return jnp.zeros_like(c).at[:n - 1].set(c[1:] * jnp.arange(1, n))


def _integrate_zero(c: jnp.ndarray) -> jnp.ndarray:
    n = c.shape[0]
    return jnp.zeros_like(c).at[1:].set(c[:n - 1] / jnp.arange(1, n))


def _log(c: jnp.ndarray) -> jnp.ndarray:
    return _integrate_zero(_mul(_derive(c), _reciprocal(c))).at[0].set(jnp.log(c[0]))


def _compose(f: jnp.ndarray, g: jnp.ndarray) -> jnp.ndarray:
    out = jnp.zeros_like(f).at[0].set(f[-1])
    for k in range(f.shape[0] - 2, -1, -1):
        out = _mul(out, g).at[0].add(f[k])
    return out


def ts_add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    _check_orders(a, b)
    return TruncSeries.of(a.coeffs + b.coeffs, a.order)


def ts_scale(a: TruncSeries, factor: float) -> TruncSeries:
    return TruncSeries.of(a.coeffs * factor, a.order)


def ts_shift(a: TruncSeries, k: int) -> TruncSeries:
    """
    Multiply by s^k (k > 0) or divide by s^-k (k < 0), keeping the order.

    Division needs the k lowest coefficients to vanish; the freed top coefficients become 0.
    """
    if k >= 0:
        return TruncSeries.of(jnp.concatenate([jnp.zeros(k), a.coeffs])[:a.order], a.order)
    k = -k
    if bool(jnp.any(a.coeffs[:k] != 0.0)):
        raise DomainError(f"cannot divide by s^{k}: low coefficients are not zero")
    return TruncSeries.of(a.coeffs[k:], a.order)


def ts_mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    _check_orders(a, b)
    return TruncSeries.of(_mul(a.coeffs, b.coeffs), a.order)


def ts_reciprocal(a: TruncSeries) -> TruncSeries:
    if float(a.coeffs[0]) == 0.0:
        raise DomainError("reciprocal of a series with zero constant term")
    return TruncSeries.of(_reciprocal(a.coeffs), a.order)


def ts_log(a: TruncSeries) -> TruncSeries:
    """
    Logarithm mod s^order.
    Args:
        a: TruncSeries with positive constant term
    Returns:
        TruncSeries L with exp(L) = a mod s^order

    Notes:
        L = log(a_0) + integral of a'/a. The derivative loses the top coefficient, the
        zero-constant integral restores it, so all order coefficients are exact.
    """
    if not float(a.coeffs[0]) > 0.0:
        raise DomainError(f"log needs a positive constant term, got {float(a.coeffs[0])}")
    return TruncSeries.of(_log(a.coeffs), a.order)


def ts_exp(a: TruncSeries) -> TruncSeries:
    """Exponential mod s^order by Newton iteration f <- f (1 + a - log f)."""
    c = a.coeffs
    shifted = c.at[0].set(0.0)
    f = jnp.zeros_like(c).at[0].set(1.0)
    for _ in range(_newton_steps(a.order)):
        f = _mul(f, (shifted - _log(f)).at[0].add(1.0))
    return TruncSeries.of(f * jnp.exp(c[0]), a.order)


def ts_derive(a: TruncSeries) -> TruncSeries:
    """Formal derivative; the top coefficient is unknown mod s^order and set to 0."""
    return TruncSeries.of(_derive(a.coeffs), a.order)


def ts_integrate_zero(a: TruncSeries) -> TruncSeries:
    """Primitive with zero constant term; the would-be coefficient of s^order is dropped."""
    return TruncSeries.of(_integrate_zero(a.coeffs), a.order)


def ts_compose(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """Horner evaluation of f at g in the truncated ring. g must have zero constant term."""
    _check_orders(f, g)
    if float(g.coeffs[0]) != 0.0:
        raise DomainError(f"inner series must vanish at 0, got constant {float(g.coeffs[0])}")
    return TruncSeries.of(_compose(f.coeffs, g.coeffs), f.order)


def ts_comp_inverse(f: TruncSeries) -> TruncSeries:
    """
    Compositional inverse g with f(g(s)) = g(f(s)) = s mod s^order.
    Args:
        f: TruncSeries with f_0 = 0 and f_1 != 0
    Returns:
        TruncSeries g

    Notes:
        Newton iteration g <- g - (f o g - s) / (f' o g), starting from g = s / f_1.
    """
    if float(f.coeffs[0]) != 0.0:
        raise DomainError("compositional inverse needs f(0) = 0")
    if f.order < 2 or float(f.coeffs[1]) == 0.0:
        raise SingularSeriesError("compositional inverse needs a nonzero linear coefficient")
    s = jnp.zeros_like(f.coeffs).at[1].set(1.0)
    df = _derive(f.coeffs)
    g = s / f.coeffs[1]
    for _ in range(_newton_steps(f.order)):
        residual = _compose(f.coeffs, g) - s
        g = g - _mul(residual, _reciprocal(_compose(df, g)))
    return TruncSeries.of(g, f.order)


def ts_sqrt(a: TruncSeries) -> TruncSeries:
    """Square root with positive constant term, by Newton iteration r <- (r + a / r) / 2."""
    if not float(a.coeffs[0]) > 0.0:
        raise DomainError(f"sqrt needs a positive constant term, got {float(a.coeffs[0])}")
    r = jnp.zeros_like(a.coeffs).at[0].set(jnp.sqrt(a.coeffs[0]))
    for _ in range(_newton_steps(a.order)):
        r = 0.5 * (r + _mul(a.coeffs, _reciprocal(r)))
    return TruncSeries.of(r, a.order)
