"""Training loop: initialize, then repeat loss -> gradient -> optimizer update."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .loss import CombineMode, collocation_grid, combine, loss_and_gradient
from .network import MlpParams, NetworkConfig, forward, init
from .optim import OptimizerConfig, OptimizerState, step
from .problem import BvpProblem, builtin, exact_solution

log = logging.getLogger(__name__)


class TrainingDiverged(FloatingPointError):
    """Raised when the loss or its gradient stops being finite.

    ``last_good`` holds the parameters from the last epoch whose loss was
    finite.
    """

    def __init__(self, epoch: int, last_good: MlpParams, message: str = ""):
        self.epoch = epoch
        self.last_good = last_good
        super().__init__(message or f"non-finite loss or gradient at epoch {epoch}")


@dataclass(frozen=True)
class TrainConfig:
    problem_name: str = "example1"
    network: NetworkConfig = field(default_factory=NetworkConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    epochs: int = 13000
    grid_points: int = 21
    combine_mode: CombineMode = CombineMode.SUM
    stop_epsilon: Optional[float] = None
    log_every: int = 100
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "combine_mode", CombineMode(self.combine_mode))
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if self.stop_epsilon is not None and not self.stop_epsilon > 0:
            raise ValueError("stop_epsilon must be positive when given")
        if self.log_every < 1:
            raise ValueError("log_every must be at least 1")

    @property
    def effective_network(self) -> NetworkConfig:
        # the run seed wins over whatever seed the network config carries
        return replace(self.network, seed=self.seed)


class TrainRecord(NamedTuple):
    epoch: int
    interior: float
    boundary: float
    total: float


def train(config: TrainConfig, problem: BvpProblem | None = None,
          callback: Callable[[TrainRecord], None] | None = None
          ) -> tuple[MlpParams, list[TrainRecord]]:
    """Train a network on ``problem`` (default: the built-in named in the config).

    The history holds epoch 0 (before any update), every ``log_every``-th
    epoch and the last epoch run. Epoch ``e`` records the loss after ``e``
    parameter updates. With ``stop_epsilon`` set, training ends at the first
    epoch whose total loss is at or below it.
    """
    if problem is None:
        problem = builtin(config.problem_name)
    params = init(config.effective_network)
    points = collocation_grid(*problem.domain, config.grid_points)
    mode = config.combine_mode
    history: list[TrainRecord] = []

    def record(epoch, bd):
        rec = TrainRecord(epoch, bd.interior, bd.boundary, bd.total)
        history.append(rec)
        if callback is not None:
            callback(rec)
        log.debug("epoch %d: L_d=%.6e L_bc=%.6e L=%.6e", *rec)

    def evaluate_loss(p, epoch):
        # overflow is caught by the finiteness check below
        with np.errstate(over="ignore", invalid="ignore"):
            bd, grad = loss_and_gradient(p, problem, points, mode)
        if not (np.isfinite(bd.total) and np.all(np.isfinite(grad))):
            raise TrainingDiverged(epoch, last_good)
        return bd, grad

    def reached(bd):
        return config.stop_epsilon is not None and bd.total <= config.stop_epsilon

    last_good = params
    bd, grad = evaluate_loss(params, 0)
    record(0, bd)
    if reached(bd) or config.epochs == 0:
        return params, history

    flat = params.flatten()
    state = OptimizerState.fresh(flat.size)
    for epoch in range(1, config.epochs + 1):
        last_good = params
        flat, state = step(config.optimizer, state, flat, grad)
        try:
            params = params.with_flat(flat)
        except ValueError:
            raise TrainingDiverged(epoch, last_good) from None
        bd, grad = evaluate_loss(params, epoch)
        done = reached(bd) or epoch == config.epochs
        if done or epoch % config.log_every == 0:
            record(epoch, bd)
        if done:
            break
    return params, history


def history_is_consistent(history: list[TrainRecord], mode: CombineMode | str) -> bool:
    return all(rec.total == combine(rec.interior, rec.boundary, mode) for rec in history)


class EvalRow(NamedTuple):
    x: float
    predicted: float
    exact: Optional[float]
    abs_error: Optional[float]


def evaluate(params: MlpParams, problem: BvpProblem, grid) -> list[EvalRow]:
    xs = np.sort(np.asarray(grid, dtype=float).reshape(-1))
    pred = forward(params, xs)
    if not problem.has_exact:
        return [EvalRow(float(x), float(y), None, None) for x, y in zip(xs, pred)]
    ref = exact_solution(problem, xs)
    return [EvalRow(float(x), float(y), float(r), float(abs(r - y)))
            for x, y, r in zip(xs, pred, ref)]
