import argparse
import sys

import wandb

from finite_rect.context.meta_context import EXPERIMENTS, RunConfig
from finite_rect.context.tasks import cmds
from finite_rect.errors import DomainError, FiniteRectError, UsageError
from finite_rect.utils.generic import save_report


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from err


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from err


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finite-rect")
    parser.add_argument("command", choices=sorted(cmds), help="pipeline to run")
    parser.add_argument("experiment", nargs="?", choices=EXPERIMENTS, help="limits subcommand")
    parser.add_argument("--p", help="polynomial (or R-transform for invert): path or inline JSON")
    parser.add_argument("--q", help="second polynomial: path or inline JSON")
    parser.add_argument("--d", type=int, help="degree")
    parser.add_argument("--m", type=int, help="larger dimension")
    parser.add_argument("--lambda", dest="lam", help="exact ratio d/m, e.g. 1/2")
    parser.add_argument("--order", type=int, default=16, help="free series order")
    parser.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo samples")
    parser.add_argument("--seed", type=int, default=0, help="64-bit seed")
    parser.add_argument("--chunk", type=int, default=4096, help="samples per compiled batch")
    parser.add_argument("--out", help="output path")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--threshold", type=float, default=4.0, help="largest accepted |z|")
    parser.add_argument("--n_list", "--n-list", type=_int_list, default=(1, 2, 4, 8, 16), help="e.g. 1,2,4,8")
    parser.add_argument("--k_max", "--k-max", type=int, default=4, help="coefficients compared by converge")
    parser.add_argument("--s_grid", "--s-grid", type=_float_list, default=(0.1, 0.2), help="e.g. 0.05,0.1")
    parser.add_argument("--crosscheck", action="store_true", help="convolve: diff-op route delta")
    parser.add_argument("--free", action="store_true", help="rtransform: add the free R series")
    parser.add_argument("--export_samples", "--export-samples", help="mc-verify: per-sample CSV path")
    parser.add_argument("--allow_large", "--allow-large", action="store_true", help="allow stacked degree above 64")
    parser.add_argument("--wb_project", help="wandb project name", default=None)
    parser.add_argument("--headless", action="store_true", help="Disable progress bars")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    wandb.init(anonymous="allow", mode="disabled") if args.wb_project is None else (
        wandb.init(project=args.wb_project, anonymous="allow", config=vars(args))
    )
    try:
        cfg = RunConfig(**vars(args))
        outcome = cmds[cfg.command].run(cfg)
        for row in outcome.rows:
            wandb.log({k: v for k, v in row.items() if isinstance(v, (int, float))})
        path = save_report(outcome.payload, outcome.rows, cfg.command, cfg.format, cfg.out)
        print(path)
        return outcome.status
    except (UsageError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FiniteRectError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    finally:
        wandb.finish()


if __name__ == '__main__':
    sys.exit(main())
