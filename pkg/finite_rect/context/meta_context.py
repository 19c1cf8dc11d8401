from __future__ import annotations

import collections.abc
from dataclasses import dataclass, field
from inspect import Parameter, signature
from typing import Callable, Optional, get_args, get_origin, get_type_hints

from finite_rect.errors import UsageError
from finite_rect.poly import RectParams

FORMATS = ("json", "csv")
EXPERIMENTS = ("lln", "clt", "converge", "tightness")


@dataclass(frozen=True)
class RunConfig:
    command: str                     # registry key in context.tasks.cmds
    experiment: Optional[str] = None # limits subcommand
    p: Optional[str] = None          # path or inline JSON
    q: Optional[str] = None          # path or inline JSON
    d: Optional[int] = None          # degree
    m: Optional[int] = None          # larger dimension, exclusive with lam
    lam: Optional[str] = None        # exact ratio "d/m"
    order: int = 16                  # free series order
    samples: int = 100_000           # Monte-Carlo draws
    seed: int = 0                    # 64-bit seed
    chunk: int = 4096                # samples per compiled batch
    out: Optional[str] = None        # output path, default reports/<command>_<time>
    format: str = "json"             # json | csv
    threshold: float = 4.0           # |z| above which mc-verify fails
    n_list: tuple[int, ...] = (1, 2, 4, 8, 16)
    k_max: int = 4
    s_grid: tuple[float, ...] = (0.1, 0.2)
    crosscheck: bool = False
    free: bool = False
    export_samples: Optional[str] = None
    allow_large: bool = False
    wb_project: Optional[str] = None
    headless: bool = False

    def __post_init__(self):
        if self.command == "limits" and self.experiment not in EXPERIMENTS:
            raise UsageError(f"limits needs one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.command != "invert":
            if self.d is None:
                raise UsageError(f"{self.command} needs --d")
            if (self.m is None) == (self.lam is None):
                raise UsageError("give exactly one of --m and --lambda")
            self.params()
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.samples < 1:
            raise UsageError(f"samples must be positive, got {self.samples}")
        if self.chunk < 1:
            raise UsageError(f"chunk must be positive, got {self.chunk}")
        if self.order < 1 or self.k_max < 1:
            raise UsageError("order and k_max must be positive")
        if not self.threshold > 0:
            raise UsageError(f"threshold must be positive, got {self.threshold}")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def params(self) -> RectParams:
        if self.lam is not None:
            return RectParams.from_lambda(self.d, self.lam)
        return RectParams(self.d, self.m)

    @property
    def progress(self) -> bool:
        return not self.headless


@dataclass
class Outcome:
    payload: dict                                   # JSON body, schema_version is added on save
    rows: list[dict] = field(default_factory=list)  # CSV body and wandb rows
    status: int = 0                                 # 0 ok, 1 numeric or statistical failure


class Command:
    def __init__(
            self,
            handler: Callable[[RunConfig], Outcome],
            needs: tuple[str, ...],
    ):
        self.handler = handler  # builds the outcome from a validated config
        self.needs = needs      # RunConfig fields that must be set
        self._validate_handler()

    def _validate_handler(self):
        hints = get_type_hints(self.__init__)
        expected = hints["handler"]
        if get_origin(expected) is not collections.abc.Callable:
            raise TypeError("handler hint is not a callable type")
        expected_args, _ = get_args(expected)
        params = list(signature(self.handler).parameters.values())
        if len(params) != len(expected_args):
            raise TypeError(f"handler expects {len(expected_args)} parameters, got {len(params)}")
        if any(p.annotation is Parameter.empty for p in params):
            raise TypeError(f"handler {self.handler.__name__} lacks type annotations")

    def run(self, cfg: RunConfig) -> Outcome:
        missing = [name for name in self.needs if getattr(cfg, name) is None]
        if missing:
            raise UsageError(f"{cfg.command} needs --{', --'.join(missing)}")
        return self.handler(cfg)
