from __future__ import annotations

import jax.numpy as jnp

from finite_rect.context.meta_context import Command, Outcome, RunConfig
from finite_rect.conv import rect_convolve, rect_convolve_diffop
from finite_rect.utils.generic import load_poly


def run_convolve(cfg: RunConfig) -> Outcome:
    params = cfg.params()
    p, q = load_poly(cfg.p), load_poly(cfg.q)
    result = rect_convolve(p, q, params)
    payload = {"d": params.d, "m": params.m, "result": result.to_json()}
    rows = [{"i": i, "coeff": float(c)} for i, c in enumerate(result.coeffs)]
    if cfg.crosscheck:
        other = rect_convolve_diffop(p, q, params)
        delta = jnp.abs(result.coeffs - other.coeffs)
        payload["crosscheck_delta"] = float(jnp.max(delta))
        for row, c, dc in zip(rows, other.coeffs, delta):
            row.update({"diffop_coeff": float(c), "delta": float(dc)})
    return Outcome(payload, rows)


cmd = Command(run_convolve, needs=("p", "q"))
