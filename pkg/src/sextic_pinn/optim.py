"""
First-order optimizers over a flat parameter vector.

``step`` is functional: it returns new parameter and state objects and never
mutates its inputs, so two optimizers fed the same gradients follow
bit-identical trajectories.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np


class NonFiniteGradientError(FloatingPointError):
    pass


class OptimizerKind(str, enum.Enum):
    SGD = "sgd"
    ADAM = "adam"
    ADAMAX = "adamax"


@dataclass(frozen=True)
class OptimizerConfig:
    kind: OptimizerKind = OptimizerKind.ADAMAX
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "kind", OptimizerKind(self.kind))
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            beta = getattr(self, name)
            if not 0 <= beta < 1:
                raise ValueError(f"{name} must be in [0, 1), got {beta}")


@dataclass(frozen=True)
class OptimizerState:
    step_count: int
    m: np.ndarray
    u: np.ndarray  # second moment (Adam) or infinity norm (Adamax)

    @classmethod
    def fresh(cls, n: int) -> "OptimizerState":
        return cls(0, np.zeros(n), np.zeros(n))


def step(config: OptimizerConfig, state: OptimizerState, params: np.ndarray,
         grads: np.ndarray) -> tuple[np.ndarray, OptimizerState]:
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )
    bad = ~np.isfinite(grads)
    if bad.any():
        idx = np.flatnonzero(bad)
        raise NonFiniteGradientError(
            f"non-finite gradient at step {state.step_count + 1}, "
            f"{idx.size} entries (first index {idx[0]})"
        )

    t = state.step_count + 1
    lr, b1, b2 = config.learning_rate, config.beta1, config.beta2

    if config.kind is OptimizerKind.SGD:
        return params - lr * grads, replace(state, step_count=t)

    m = b1 * state.m + (1.0 - b1) * grads
    if config.kind is OptimizerKind.ADAM:
        v = b2 * state.u + (1.0 - b2) * grads * grads
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        new = params - lr * m_hat / (np.sqrt(v_hat) + config.epsilon_hat)
        return new, OptimizerState(t, m, v)

    u = np.maximum(b2 * state.u, np.abs(grads))
    # u == 0 only while every gradient so far was 0 for that entry: no update
    safe = np.where(u > 0, u, 1.0)
    update = np.where(u > 0, m / safe, 0.0)
    new = params - (lr / (1.0 - b1**t)) * update
    return new, OptimizerState(t, m, u)


@dataclass
class Optimizer:
    """Stateful convenience wrapper around :func:`step`."""

    config: OptimizerConfig
    state: OptimizerState = field(default=None)

    def step(self, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
        if self.state is None:
            self.state = OptimizerState.fresh(np.size(params))
        params, self.state = step(self.config, self.state, params, grads)
        return params


@dataclass(frozen=True)
class SmokeReport:
    kind: OptimizerKind
    steps: int
    max_error: float
    converged: bool
    final: np.ndarray


def minimize_quadratic_smoke(config: OptimizerConfig, dim: int = 1, steps: int = 5000,
                             target: float = 3.0, tol: float = 1e-2) -> SmokeReport:
    """Minimize ``sum((p - target)^2)`` from ``p = 0`` and report the distance."""
    p = np.zeros(dim)
    state = OptimizerState.fresh(dim)
    for _ in range(steps):
        p, state = step(config, state, p, 2.0 * (p - target))
    err = float(np.max(np.abs(p - target)))
    return SmokeReport(config.kind, steps, err, err <= tol, p)


def lbfgs_minimize(fun_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
                   x0: np.ndarray, maxiter: int = 1000, gtol: float = 1e-10):
    """Quasi-Newton refinement (scipy's L-BFGS-B, unbounded).

    Not used by the default training path; handy for polishing a network
    after first-order training.
    """
    from scipy.optimize import minimize

    return minimize(fun_and_grad, np.asarray(x0, dtype=float), jac=True, method="L-BFGS-B",
                    options={"maxiter": maxiter, "gtol": gtol, "ftol": 0.0})
