from __future__ import annotations

import math
from dataclasses import dataclass, field

import jax.numpy as jnp
from jaxtyping import Array, Complex, Float

from finite_rect.errors import DomainError, InvalidTransformError, RealRootednessError, UsageError
from finite_rect.poly import NonnegPoly, RectParams, alternating_signs
from finite_rect.series import TruncSeries, ts_exp, ts_log

T_VALUES_WARN = 1e-7  # relative power-sum residual above which t_values are flagged


@dataclass(frozen=True, eq=False)
class TMoments:
    params: RectParams
    moments: Float[Array, "d+1"]  # E[T^i], i = 0..d

    def __post_init__(self):
        if self.moments.shape != (self.params.d + 1,):
            raise UsageError(f"expected {self.params.d + 1} moments, got shape {self.moments.shape}")
        if not bool(jnp.all(jnp.isfinite(self.moments))):
            raise DomainError("moments must be finite")
        if float(self.moments[0]) != 1.0:
            raise DomainError(f"moment of order 0 must be 1, got {float(self.moments[0])}")


@dataclass(frozen=True, eq=False)
class TValues:
    values: Complex[Array, "d"]
    residual: float                    # max relative error of the recovered power sums
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class FiniteR:
    params: RectParams
    poly_in_s: TruncSeries  # order d+1, zero constant term

    def __post_init__(self):
        if self.poly_in_s.order != self.params.d + 1:
            raise UsageError(f"R-transform needs order d+1={self.params.d + 1}, got {self.poly_in_s.order}")
        if float(self.poly_in_s[0]) != 0.0:
            raise DomainError(f"R-transform must vanish at s=0, got {float(self.poly_in_s[0])}")

    @property
    def coeffs(self) -> Float[Array, "d+1"]:
        return self.poly_in_s.coeffs

    def __add__(self, other: FiniteR) -> FiniteR:
        if self.params != other.params:
            raise UsageError(f"cannot add R-transforms for {self.params} and {other.params}")
        return FiniteR(self.params, self.poly_in_s + other.poly_in_s)

    def scale(self, factor: float) -> FiniteR:
        return FiniteR(self.params, TruncSeries.of(self.coeffs * factor))

    def to_json(self) -> dict:
        return {"d": self.params.d, "m": self.params.m, "r_coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, record: dict) -> FiniteR:
        try:
            params = RectParams(int(record["d"]), int(record["m"]))
            coeffs = record["r_coeffs"]
        except KeyError as err:
            raise UsageError(f"R-transform record is missing {err}") from err
        if len(coeffs) != params.d + 1:
            raise UsageError(f"r_coeffs needs d+1={params.d + 1} entries, got {len(coeffs)}")
        return cls(params, TruncSeries.of(coeffs))


def _moment_ratios(params: RectParams) -> jnp.ndarray:
    # rho_i = i!(m-i)!(d-i)! / (m! d!)
    d, m = params.d, params.m
    i = jnp.arange(1, d + 1)
    return jnp.concatenate([jnp.ones(1), jnp.cumprod(i / ((m - i + 1) * (d - i + 1)))])


def _exp_weights(params: RectParams) -> jnp.ndarray:
    # g_i = (md)^i / i! * rho_i = prod_{t<i} md / ((m-t)(d-t))
    d, m = params.d, params.m
    t = jnp.arange(d)
    return jnp.concatenate([jnp.ones(1), jnp.cumprod(m * d / ((m - t) * (d - t)))])


def _check_degree(p: NonnegPoly, params: RectParams):
    if p.degree != params.d:
        raise UsageError(f"polynomial has degree {p.degree}, expected d={params.d}")


def t_moments(p: NonnegPoly, params: RectParams) -> TMoments:
    """
    Moments of the rectangular T-transform: E[T^i] = i!(m-i)!(d-i)! / (m! d!) * p_i.
    """
    _check_degree(p, params)
    return TMoments(params, (_moment_ratios(params) * p.alternating()).at[0].set(1.0))


def poly_from_moments(tm: TMoments, check: bool = True) -> NonnegPoly:
    """Inverse of t_moments. check runs the realrootedness test on the result."""
    alt = tm.moments / _moment_ratios(tm.params)
    return NonnegPoly.from_coeffs(alt * alternating_signs(tm.params.d), check=check)


def t_moments_of_sum(a: TMoments, b: TMoments) -> TMoments:
    """
    Moments of T_a + T_b for independent T_a, T_b: sum_i C(k, i) E[T_a^i] E[T_b^(k-i)].
    These are the T-moments of the convolution of the underlying polynomials.
    """
    if a.params != b.params:
        raise UsageError(f"moment records for {a.params} and {b.params} cannot be combined")
    d = a.params.d
    out = [1.0]
    for k in range(1, d + 1):
        binom = jnp.array([math.comb(k, i) for i in range(k + 1)], dtype=jnp.float64)
        out.append(jnp.sum(binom * a.moments[:k + 1] * b.moments[k::-1]))
    return TMoments(a.params, jnp.array(out))


def t_values(tm: TMoments) -> TValues:
    """
    The d values t_j (generally complex) whose k-th power sums are d * E[T^k].

    Newton's identities give the elementary symmetric functions, whose polynomial is solved
    through its companion matrix. Multiple values are ill-conditioned; the power-sum residual
    is reported with a warning instead of failing.
    """
    d = tm.params.d
    power = d * tm.moments[1:]
    e = [1.0]
    for k in range(1, d + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * power[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    coeffs = jnp.array(e) * alternating_signs(d)
    values = jnp.roots(coeffs)

    k = jnp.arange(1, d + 1)
    recovered = jnp.sum(values[None, :] ** k[:, None], axis=1)
    residual = float(jnp.max(jnp.abs(recovered - power) / (1.0 + jnp.abs(power))))
    warnings = []
    if residual > T_VALUES_WARN:
        warnings.append(f"t-values ill-conditioned: power-sum residual {residual:.2e}")
    return TValues(values, residual, warnings)


def finite_R(p: NonnegPoly, params: RectParams) -> FiniteR:
    """
    Rectangular finite R-transform -(s/d) d/ds log E[exp(-T s m d)] mod s^(d+1).
    Args:
        p: NonnegPoly of degree params.d
        params: RectParams
    Returns:
        FiniteR with coefficients of s^1 .. s^d (s^0 is 0)

    Notes:
        The exponential generating series is built as p's standard coefficients times
        prod_{t<i} md/((m-t)(d-t)), which never forms (md)^i or a factorial.
    """
    _check_degree(p, params)
    gen = TruncSeries.of(p.coeffs * _exp_weights(params))
    log_gen = ts_log(gen).coeffs
    k = jnp.arange(params.d + 1)
    return FiniteR(params, TruncSeries.of((-k * log_gen / params.d).at[0].set(0.0)))


def finite_R_invert(r: FiniteR) -> NonnegPoly:
    """
    Recover p from its finite R-transform.

    Raises InvalidTransformError when the recovered coefficients do not form a polynomial
    with real nonnegative roots, i.e. r is not the transform of any such polynomial.
    """
    params = r.params
    k = jnp.arange(1, params.d + 1)
    log_gen = jnp.zeros(params.d + 1).at[1:].set(-params.d * r.coeffs[1:] / k)
    gen = ts_exp(TruncSeries.of(log_gen)).coeffs
    coeffs = (gen / _exp_weights(params)).at[0].set(1.0)
    try:
        return NonnegPoly.from_coeffs(coeffs, check=True)
    except RealRootednessError as err:
        raise InvalidTransformError(f"not the R-transform of a nonnegative-rooted polynomial: {err}") from err
