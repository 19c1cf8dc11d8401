from __future__ import annotations

from finite_rect.context.meta_context import Command, Outcome, RunConfig
from finite_rect.errors import UsageError
from finite_rect.limits import clt_experiment, convergence_sweep, lln_experiment, tightness_check
from finite_rect.utils.generic import load_poly, load_polys


def run_limits(cfg: RunConfig) -> Outcome:
    params = cfg.params()
    if cfg.experiment == "lln":
        report = lln_experiment(load_polys(cfg.p), params, cfg.n_list, progress=cfg.progress)
        return Outcome(report.to_json(), report.flat_rows())
    if cfg.experiment == "clt":
        report = clt_experiment(load_poly(cfg.p), params, cfg.n_list, progress=cfg.progress)
        return Outcome(report.to_json(), report.flat_rows())
    if cfg.experiment == "converge":
        report = convergence_sweep(load_poly(cfg.p), params, cfg.n_list, cfg.k_max,
                                   allow_large=cfg.allow_large, progress=cfg.progress)
        return Outcome(report.to_json(), report.rows)
    if cfg.q is None:
        raise UsageError("tightness needs --q")
    report = tightness_check(load_poly(cfg.p), load_poly(cfg.q), params, cfg.n_list, cfg.s_grid,
                             allow_large=cfg.allow_large, progress=cfg.progress)
    return Outcome(report.to_json(), report.rows)


cmd = Command(run_limits, needs=("p",))
