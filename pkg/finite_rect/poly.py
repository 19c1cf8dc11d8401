from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import jax.numpy as jnp
from jaxtyping import Array, Float

from finite_rect.errors import DomainError, RealRootednessError, UsageError

IMAG_TOL = 1e-8   # |Im| / (1 + |Re|) accepted as real without further checks
ROOT_TOL = 1e-8   # backward residual of a real part accepted as a root
POLISH_STEPS = 4
CLAMP_TOL = 1e-10  # negative drift clamped to 0, relative to 1 + largest root


@dataclass(frozen=True)
class RectParams:
    d: int  # degree, the smaller dimension
    m: int  # the larger dimension

    def __post_init__(self):
        if not (isinstance(self.d, int) and isinstance(self.m, int)):
            raise UsageError(f"d and m must be integers, got {self.d!r}, {self.m!r}")
        if not 1 <= self.d <= self.m:
            raise UsageError(f"need m >= d >= 1, got d={self.d}, m={self.m}")

    @classmethod
    def from_lambda(cls, d: int, lam: str | Fraction) -> RectParams:
        """Params from d and an exact ratio lambda = d/m, e.g. "1/2"."""
        try:
            ratio = Fraction(lam)
        except (ValueError, ZeroDivisionError) as err:
            raise UsageError(f"lambda must be a rational 'd/m' string, got {lam!r}") from err
        if not 0 < ratio <= 1:
            raise UsageError(f"lambda must lie in (0, 1], got {ratio}")
        m = Fraction(d) / ratio
        if m.denominator != 1:
            raise UsageError(f"lambda={ratio} with d={d} gives non-integral m={m}")
        return cls(d, int(m))

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.d, self.m)

    @property
    def lam(self) -> float:
        return self.d / self.m

    def scaled(self, n: int) -> RectParams:
        """Params (d n, m n): same lambda, n stacked blocks."""
        return RectParams(self.d * n, self.m * n)


@dataclass(frozen=True, eq=False)
class RootList:
    roots: Float[Array, "d"]     # ascending
    max_imag_residue: float      # largest |Im| / (1 + |Re|) seen before dropping imaginary parts
    backward_residual: float = 0.0  # largest |p(x)| / sum_i |c_i| |x|^(d-i) over the returned roots

    def __len__(self):
        return int(self.roots.shape[0])

    def max(self) -> float:
        return float(self.roots[-1])


@dataclass(frozen=True, eq=False)
class NonnegPoly:
    coeffs: Float[Array, "d+1"]  # decreasing degree, coeffs[0] == 1

    @classmethod
    def from_coeffs(cls, coeffs, check: bool = True) -> NonnegPoly:
        """
        Monic polynomial from standard coefficients (decreasing degree).
        Args:
            coeffs: sequence of d+1 reals, leading coefficient 1
            check: run the realrootedness / nonnegativity check through roots()
        Returns:
            NonnegPoly
        """
        c = jnp.ravel(jnp.asarray(coeffs, dtype=jnp.float64))
        if c.shape[0] < 1:
            raise UsageError("a polynomial needs at least its leading coefficient")
        if not bool(jnp.all(jnp.isfinite(c))):
            raise DomainError("polynomial coefficients must be finite")
        if abs(float(c[0]) - 1.0) > 1e-12:
            raise UsageError(f"polynomial must be monic, leading coefficient is {float(c[0])}")
        p = cls(c.at[0].set(1.0))
        if check:
            roots(p)
        return p

    @classmethod
    def from_json(cls, record: dict) -> NonnegPoly:
        """Accepts {"coeffs": [...]} or {"roots": [...]}; "d" is checked when present."""
        if "roots" in record:
            p = from_roots(record["roots"])
        elif "coeffs" in record:
            p = cls.from_coeffs(record["coeffs"])
        else:
            raise UsageError("polynomial record needs a 'coeffs' or 'roots' field")
        if "d" in record and int(record["d"]) != p.degree:
            raise UsageError(f"record says d={record['d']} but the polynomial has degree {p.degree}")
        return p

    def to_json(self) -> dict:
        return {"d": self.degree, "coeffs": [float(c) for c in self.coeffs]}

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0]) - 1

    def alternating(self) -> Float[Array, "d+1"]:
        """p_i with p(x) = sum_i (-1)^i p_i x^(d-i); p_0 = 1 and all p_i >= 0."""
        return self.coeffs * alternating_signs(self.degree)

    def __call__(self, x):
        return jnp.polyval(self.coeffs, x)

    def derivative(self, x):
        return jnp.polyval(jnp.polyder(self.coeffs), x)


@dataclass(frozen=True, eq=False)
class SymmetricPoly:
    base: NonnegPoly  # represents base(x^2)

    @property
    def degree(self) -> int:
        return 2 * self.base.degree

    @property
    def coeffs(self) -> Float[Array, "2d+1"]:
        c = jnp.zeros(self.degree + 1)
        return c.at[::2].set(self.base.coeffs)

    def roots(self) -> Float[Array, "2d"]:
        r = jnp.sqrt(roots(self.base).roots)
        return jnp.sort(jnp.concatenate([-r, r]))


def alternating_signs(d: int) -> jnp.ndarray:
    return jnp.where(jnp.arange(d + 1) % 2 == 0, 1.0, -1.0)


def from_roots(values) -> NonnegPoly:
    r = jnp.ravel(jnp.asarray(values, dtype=jnp.float64))
    if bool(jnp.any(r < 0.0)):
        raise DomainError(f"roots must be nonnegative, got min {float(jnp.min(r))}")
    coeffs = jnp.ones(1)
    for root in r:
        coeffs = jnp.convolve(coeffs, jnp.array([1.0, -root]))
    return NonnegPoly(coeffs)


def _backward_residual(c: jnp.ndarray, x: jnp.ndarray) -> jnp.ndarray:
    # |p(x)| / sum_i |c_i| |x|^(k-i); c[-1] != 0 keeps the denominator positive
    return jnp.abs(jnp.polyval(c, x)) / jnp.polyval(jnp.abs(c), jnp.abs(x))


def _polish(c: jnp.ndarray, x: jnp.ndarray, radius: jnp.ndarray) -> jnp.ndarray:
    """Newton steps on real starting points, each kept only if it stays within radius and lowers |p|."""
    dc = jnp.polyder(c)
    start = x
    for _ in range(POLISH_STEPS):
        px, dpx = jnp.polyval(c, x), jnp.polyval(dc, x)
        safe = jnp.where(dpx != 0.0, dpx, 1.0)
        nxt = x - jnp.where(dpx != 0.0, px / safe, 0.0)
        better = (jnp.abs(nxt - start) <= radius) & (jnp.abs(jnp.polyval(c, nxt)) < jnp.abs(px))
        x = jnp.where(better, nxt, x)
    return x


def roots(p: NonnegPoly) -> RootList:
    """
    Real nonnegative roots of p from companion-matrix eigenvalues.

    Notes:
        Exact zero trailing coefficients are split off as exact zero roots. The remaining factor
        goes through LAPACK geev, which balances the companion matrix before the QR iteration.
        Clustered real roots come back as complex pairs with sizeable imaginary parts, so
        realness is decided on the real parts: after a few guarded Newton steps each of them must
        be a root up to a backward residual of ROOT_TOL. Negative drift up to CLAMP_TOL is clamped.
    """
    c = p.coeffs
    d = p.degree
    nonzero = jnp.nonzero(c)[0]
    n_zero = d - int(nonzero[-1])
    core = c[:d + 1 - n_zero]
    k = core.shape[0] - 1
    if k == 0:
        return RootList(jnp.zeros(d), 0.0, 0.0)

    companion = jnp.zeros((k, k)).at[0, :].set(-core[1:]).at[jnp.arange(1, k), jnp.arange(k - 1)].set(1.0)
    eig = jnp.linalg.eigvals(companion)
    max_imag = float(jnp.max(jnp.abs(eig.imag) / (1.0 + jnp.abs(eig.real))))
    radius = jnp.abs(eig.imag) + IMAG_TOL * (1.0 + jnp.abs(eig.real))
    real = jnp.sort(_polish(core, eig.real, radius))
    backward = float(jnp.max(_backward_residual(core, real)))
    if max_imag > IMAG_TOL and backward > ROOT_TOL:
        raise RealRootednessError(
            f"complex root found, imaginary residue {max_imag:.3e}, backward residual {backward:.3e}")

    floor = -CLAMP_TOL * (1.0 + float(jnp.max(jnp.abs(real))))
    if float(real[0]) < floor:
        raise RealRootednessError(f"negative root found: {float(real[0]):.3e}")
    real = jnp.maximum(real, 0.0)
    return RootList(jnp.sort(jnp.concatenate([jnp.zeros(n_zero), real])), max_imag, backward)


def symmetrize(p: NonnegPoly) -> SymmetricPoly:
    return SymmetricPoly(p)


def scale_roots(p: NonnegPoly, alpha: float) -> NonnegPoly:
    """
    The operator R_alpha: multiply every root by alpha, i.e. alpha^d p(x / alpha).
    """
    if not alpha > 0:
        raise DomainError(f"scale factor must be positive, got {alpha}")
    return NonnegPoly(p.coeffs * alpha ** jnp.arange(p.degree + 1))


def root_mean(p: NonnegPoly) -> float:
    if p.degree == 0:
        raise DomainError("a constant polynomial has no roots to average")
    return float(p.alternating()[1]) / p.degree


def expectation_sym(p: NonnegPoly) -> float:
    sym = symmetrize(p)
    if sym.degree == 0:
        return 0.0
    # odd coefficients of p(x^2) are identically zero
    return -float(sym.coeffs[1]) / sym.degree + 0.0


def variance_sym(p: NonnegPoly) -> float:
    """Mean square of the 2d roots +-sqrt(lambda_i), which is the mean of the roots of p."""
    return root_mean(p)


def power_sums(p: NonnegPoly, k_max: int) -> Float[Array, "k_max"]:
    """
    Power sums sum_i lambda_i^k for k = 1..k_max from the coefficients (Newton's identities).
    """
    d = p.degree
    e = jnp.zeros(max(k_max, d) + 1).at[:d + 1].set(p.alternating())
    sums = jnp.zeros(k_max + 1)
    for k in range(1, k_max + 1):
        i = jnp.arange(1, k)
        acc = jnp.sum(_alt(i) * e[i] * sums[k - i])
        sums = sums.at[k].set(acc + _alt(jnp.array(k)) * k * e[k])
    return sums[1:]


def _alt(i):
    # (-1)^(i-1)
    return jnp.where(i % 2 == 1, 1.0, -1.0)


def max_root(p: NonnegPoly) -> float:
    if p.degree == 0:
        raise DomainError("a constant polynomial has no roots")
    return roots(p).max()
