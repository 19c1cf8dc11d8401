from __future__ import annotations

from finite_rect.context.meta_context import Command, Outcome, RunConfig
from finite_rect.finite_transforms import finite_R, finite_R_invert
from finite_rect.free_transforms import free_rect_R_series, symmetric_moments
from finite_rect.utils.generic import load_finite_r, load_poly


def run_rtransform(cfg: RunConfig) -> Outcome:
    params = cfg.params()
    p = load_poly(cfg.p)
    r = finite_R(p, params)
    payload = r.to_json()
    rows = [{"k": k, "r_coeff": float(c)} for k, c in enumerate(r.coeffs)]
    if cfg.free:
        # free series of the root measure of p, coefficients of x^0 .. x^(order-1)
        free = free_rect_R_series(symmetric_moments(p, cfg.order - 1), params.lam, cfg.order).coeffs
        payload["free_r_coeffs"] = [float(c) for c in free]
        for k, c in enumerate(free):
            if k < len(rows):
                rows[k]["free_coeff"] = float(c)
            else:
                rows.append({"k": k, "free_coeff": float(c)})
    return Outcome(payload, rows)


def run_invert(cfg: RunConfig) -> Outcome:
    r = load_finite_r(cfg.p)
    p = finite_R_invert(r)
    return Outcome({"d": r.params.d, "m": r.params.m, "result": p.to_json()},
                   [{"i": i, "coeff": float(c)} for i, c in enumerate(p.coeffs)])


rtransform_cmd = Command(run_rtransform, needs=("p",))
invert_cmd = Command(run_invert, needs=("p",))
