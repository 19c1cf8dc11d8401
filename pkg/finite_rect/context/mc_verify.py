from __future__ import annotations

from finite_rect.context.meta_context import Command, Outcome, RunConfig
from finite_rect.conv import rect_convolve
from finite_rect.oracle_mc import compare, empirical_convolution, export_samples_csv
from finite_rect.utils.generic import load_poly


def run_mc_verify(cfg: RunConfig) -> Outcome:
    params = cfg.params()
    p, q = load_poly(cfg.p), load_poly(cfg.q)
    algebraic = rect_convolve(p, q, params)
    ec = empirical_convolution(p, q, params, cfg.samples, cfg.seed, cfg.chunk, progress=cfg.progress)
    result = compare(ec, algebraic)
    passed = result.passed(cfg.threshold)
    payload = {"d": params.d, "m": params.m, "threshold": cfg.threshold, "passed": passed,
               "empirical": ec.to_json(), "rows": result.rows()}
    if cfg.export_samples:
        payload["samples_csv"] = export_samples_csv(p, q, params, cfg.samples, cfg.seed, cfg.export_samples,
                                                    cfg.chunk)
    return Outcome(payload, result.rows(), status=0 if passed else 1)


cmd = Command(run_mc_verify, needs=("p", "q"))
