from __future__ import annotations

from dataclasses import dataclass, field
from itertools import cycle, islice
from typing import Sequence

import jax.numpy as jnp
from tqdm import tqdm

from finite_rect.conv import convolve_power, identity, laguerre_poly, rect_convolve
from finite_rect.errors import UsageError
from finite_rect.finite_transforms import finite_R
from finite_rect.free_transforms import free_rect_R_eval, free_rect_R_series, symmetric_moments
from finite_rect.poly import NonnegPoly, RectParams, root_mean, roots, scale_roots
from finite_rect.utils.math_helper import root_distance

DEGREE_CAP = 64  # largest stacked degree run without allow_large


@dataclass
class ConvergenceReport:
    rows: list[dict]     # n, k, finite_coeff, free_coeff, abs_gap
    metadata: dict

    def gaps(self, k: int) -> list[float]:
        return [row["abs_gap"] for row in self.rows if row["k"] == k]

    def to_json(self) -> dict:
        return {"kind": "converge", "metadata": self.metadata, "rows": self.rows}


@dataclass
class TightnessTable:
    rows: list[dict]     # n, s, r_p, r_q, r_conv, gap
    metadata: dict

    def gaps(self, s: float) -> list[float]:
        return [row["gap"] for row in self.rows if row["s"] == s]

    def to_json(self) -> dict:
        return {"kind": "tightness", "metadata": self.metadata, "rows": self.rows}


@dataclass
class LimitReport:
    rows: list[dict]     # N, roots, distance (plus bound for lln)
    target: str
    metadata: dict = field(default_factory=dict)

    def distances(self) -> list[float]:
        return [row["distance"] for row in self.rows]

    def to_json(self) -> dict:
        return {"kind": "limit", "target": self.target, "metadata": self.metadata, "rows": self.rows}

    def flat_rows(self) -> list[dict]:
        # csv cells hold scalars only
        return [{**row, "roots": ";".join(f"{r:.17g}" for r in row["roots"])} for row in self.rows]


def _check_increasing(values: Sequence[int], name: str):
    if not values:
        raise UsageError(f"{name} must not be empty")
    if any(v < 1 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise UsageError(f"{name} must be positive and strictly increasing, got {list(values)}")


def _check_cap(params: RectParams, allow_large: bool):
    if params.d > DEGREE_CAP and not allow_large:
        raise UsageError(f"degree {params.d} exceeds {DEGREE_CAP}; pass allow_large to run it")


def stack_power(p: NonnegPoly, n: int) -> NonnegPoly:
    """p^n: characteristic polynomial of n identical blocks stacked on the diagonal."""
    if n < 1:
        raise UsageError(f"stack count must be positive, got {n}")
    coeffs = p.coeffs
    for _ in range(n - 1):
        coeffs = jnp.convolve(coeffs, p.coeffs)
    return NonnegPoly(coeffs)


def convergence_sweep(
        p: NonnegPoly, params: RectParams, n_list: Sequence[int], k_max: int,
        allow_large: bool = False, progress: bool = False
) -> ConvergenceReport:
    """
    Finite R-transform of p^n at (dn, mn) against the free rectangular R-transform of the
    root measure of p, coefficient by coefficient for k = 1..k_max.

    Notes:
        The finite coefficient of s^k is paired with the free coefficient of x^k; both carry
        alpha^k when the roots are multiplied by alpha. Finite coefficients past s^(dn) are 0.
    """
    _check_increasing(n_list, "n_list")
    if k_max < 1:
        raise UsageError(f"k_max must be positive, got {k_max}")
    if p.degree != params.d:
        raise UsageError(f"polynomial has degree {p.degree}, expected d={params.d}")
    for n in n_list:
        _check_cap(params.scaled(n), allow_large)

    free = free_rect_R_series(symmetric_moments(p, k_max), params.lam, k_max + 1).coeffs
    rows = []
    pbar = tqdm(n_list, disable=not progress, desc="converge")
    for n in pbar:
        big = params.scaled(n)
        r = finite_R(stack_power(p, n), big).coeffs
        for k in range(1, k_max + 1):
            finite = float(r[k]) if k <= big.d else 0.0
            rows.append({"n": n, "k": k, "finite_coeff": finite, "free_coeff": float(free[k]),
                         "abs_gap": abs(finite - float(free[k]))})
        pbar.set_postfix({"n": n, "max_gap": max(row["abs_gap"] for row in rows[-k_max:])})
    metadata = {"base": p.to_json(), "d": params.d, "m": params.m, "n_list": list(n_list), "k_max": k_max}
    return ConvergenceReport(rows, metadata)


def tightness_check(
        p: NonnegPoly, q: NonnegPoly, params: RectParams, n_list: Sequence[int], s_grid: Sequence[float],
        allow_large: bool = False, progress: bool = False
) -> TightnessTable:
    """
    gap(s) = R_p(s) + R_q(s) - R_conv(s), where conv = p^n (+) q^n at (dn, mn) and every R is the
    pointwise free rectangular R-transform of a root measure. The gap is >= 0 and shrinks in n.
    """
    _check_increasing(n_list, "n_list")
    for name, poly in (("p", p), ("q", q)):
        if poly.degree != params.d:
            raise UsageError(f"{name} has degree {poly.degree}, expected d={params.d}")
    for n in n_list:
        _check_cap(params.scaled(n), allow_large)

    r_p = {s: free_rect_R_eval(p, params, s) for s in s_grid}
    r_q = {s: free_rect_R_eval(q, params, s) for s in s_grid}
    rows = []
    pbar = tqdm(n_list, disable=not progress, desc="tightness")
    for n in pbar:
        big = params.scaled(n)
        conv = rect_convolve(stack_power(p, n), stack_power(q, n), big)
        for s in s_grid:
            r_conv = free_rect_R_eval(conv, big, s)
            rows.append({"n": n, "s": s, "r_p": r_p[s], "r_q": r_q[s], "r_conv": r_conv,
                         "gap": r_p[s] + r_q[s] - r_conv})
        pbar.set_postfix({"n": n, "gap": rows[-1]["gap"]})
    metadata = {"p": p.to_json(), "q": q.to_json(), "d": params.d, "m": params.m,
                "n_list": list(n_list), "s_grid": list(s_grid)}
    return TightnessTable(rows, metadata)


def lln_bound(p_list: Sequence[NonnegPoly], params: RectParams, N: int) -> float:
    """
    Upper bound d * max root-mean / N on the largest root of the 1/N^2-scaled N-fold convolution:
    the roots are nonnegative and their sum is at most N d max root-mean before scaling.
    """
    return params.d * max(root_mean(p) for p in p_list) / N


def lln_experiment(
        p_list: Sequence[NonnegPoly], params: RectParams, N_list: Sequence[int], progress: bool = False
) -> LimitReport:
    """
    q_N = p_1 (+) ... (+) p_N (cycling through p_list) with roots scaled by 1/N^2; the largest
    scaled root is the distance to the limit x^d.
    """
    _check_increasing(N_list, "N_list")
    if not p_list:
        raise UsageError("lln needs at least one polynomial")
    for p in p_list:
        if p.degree != params.d:
            raise UsageError(f"polynomial has degree {p.degree}, expected d={params.d}")

    rows = []
    acc, done = identity(params), 0
    stream = cycle(p_list)
    pbar = tqdm(N_list, disable=not progress, desc="lln")
    for N in pbar:
        for p in islice(stream, N - done):
            acc = rect_convolve(acc, p, params)
        done = N
        scaled = roots(scale_roots(acc, 1.0 / N ** 2)).roots
        distance = float(jnp.max(scaled))
        rows.append({"N": N, "roots": [float(r) for r in scaled], "distance": distance,
                     "bound": lln_bound(p_list, params, N)})
        pbar.set_postfix({"N": N, "max_root": distance})
    return LimitReport(rows, "x^d", {"d": params.d, "m": params.m, "N_list": list(N_list)})


def clt_experiment(
        p: NonnegPoly, params: RectParams, N_list: Sequence[int], progress: bool = False
) -> LimitReport:
    """
    Roots of the N-fold self convolution scaled by 1/N against the Laguerre polynomial with the
    same root-mean sigma^2 = root_mean(p), i.e. laguerre_poly(params, sigma^2 / m).
    """
    _check_increasing(N_list, "N_list")
    if p.degree != params.d:
        raise UsageError(f"polynomial has degree {p.degree}, expected d={params.d}")
    sigma2 = root_mean(p)
    target = roots(laguerre_poly(params, sigma2 / params.m)).roots

    rows = []
    pbar = tqdm(N_list, disable=not progress, desc="clt")
    for N in pbar:
        scaled = roots(scale_roots(convolve_power(p, N, params), 1.0 / N)).roots
        distance = root_distance(scaled, target)
        rows.append({"N": N, "roots": [float(r) for r in scaled], "distance": distance})
        pbar.set_postfix({"N": N, "distance": distance})
    descriptor = f"laguerre(d={params.d}, m={params.m}, sigma2={sigma2 / params.m:.17g})"
    return LimitReport(rows, descriptor, {"d": params.d, "m": params.m, "sigma2": sigma2,
                                          "N_list": list(N_list)})
