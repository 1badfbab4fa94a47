"""
Physics-informed loss: mean squared ODE residual over collocation points
plus the squared boundary-condition violations, and its exact gradient
with respect to the flattened network parameters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .network import MlpParams, derivatives, derivatives_and_jacobian
from .problem import N_DERIVS, BvpProblem

DEFAULT_GRID_POINTS = 21


class CombineMode(str, enum.Enum):
    SUM = "sum"
    SUM_OF_SQUARES = "sum_of_squares"


@dataclass(frozen=True)
class LossBreakdown:
    interior: float
    boundary: float
    total: float
    mode: CombineMode = CombineMode.SUM


def combine(interior: float, boundary: float, mode: CombineMode | str = CombineMode.SUM) -> float:
    mode = CombineMode(mode)
    if mode is CombineMode.SUM:
        return interior + boundary
    return interior * interior + boundary * boundary


def collocation_grid(a: float, b: float, n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """``n`` uniformly spaced points on ``[a, b]``, endpoints included."""
    if n < 2:
        raise ValueError(f"a collocation grid needs at least 2 points, got {n}")
    if not a < b:
        raise ValueError(f"invalid interval [{a}, {b}]")
    i = np.arange(n)
    return a + i * (b - a) / (n - 1)


def _sorted_points(points) -> np.ndarray:
    xs = np.asarray(points, dtype=float).reshape(-1)
    if xs.size == 0:
        raise ValueError("interior loss needs at least one collocation point")
    # sorting fixes the reduction order, so the mean is permutation invariant
    return np.sort(xs, kind="stable")


def _ordered_sum(v: np.ndarray) -> float:
    total = 0.0
    for term in v:
        total += float(term)
    return total


def interior_loss(params: MlpParams, problem: BvpProblem, points) -> float:
    xs = _sorted_points(points)
    d = derivatives(params, xs, N_DERIVS - 1)
    r = problem.residual_fn(xs, d)
    return _ordered_sum(r * r) / xs.size


def _boundary_residuals(problem: BvpProblem, stacks: dict[float, np.ndarray]) -> np.ndarray:
    return np.array([stacks[bc.location][bc.derivative_order] - bc.target
                     for bc in problem.boundary_conditions])


def boundary_loss(params: MlpParams, problem: BvpProblem) -> float:
    locs = problem.boundary_locations()
    if not locs:
        return 0.0
    d = derivatives(params, np.array(locs), N_DERIVS - 1)
    r = _boundary_residuals(problem, dict(zip(locs, d)))
    return _ordered_sum(r * r)


def total_loss(params: MlpParams, problem: BvpProblem, points,
               mode: CombineMode | str = CombineMode.SUM) -> LossBreakdown:
    mode = CombineMode(mode)
    li = interior_loss(params, problem, points)
    lb = boundary_loss(params, problem)
    return LossBreakdown(li, lb, combine(li, lb, mode), mode)


def loss_and_gradient(params: MlpParams, problem: BvpProblem, points,
                      mode: CombineMode | str = CombineMode.SUM,
                      method: str = "auto") -> tuple[LossBreakdown, np.ndarray]:
    """Loss breakdown and ``dL/dp`` in flattened-parameter order.

    Interior and boundary points are evaluated in one batch. With the
    closed-form Jacobian the loss values can differ from :func:`total_loss`
    in the last few bits.
    """
    mode = CombineMode(mode)
    xs = _sorted_points(points)
    locs = problem.boundary_locations()
    batch = np.concatenate([xs, np.array(locs, dtype=float)])
    d, jac = derivatives_and_jacobian(params, batch, N_DERIVS - 1, method)
    n = xs.size

    d_int, j_int = d[:n], jac[:n]
    r = problem.residual_fn(xs, d_int)
    dr = problem.partials_fn(xs, d_int)
    li = _ordered_sum(r * r) / n
    # dL_d/dp = (2/N) sum_i R_i sum_k dR/dy_k J_ikp
    g_int = (2.0 / n) * np.einsum("i,ik,ikp->p", r, dr, j_int)

    if locs:
        stacks = dict(zip(locs, d[n:]))
        rows = {loc: jac[n + i] for i, loc in enumerate(locs)}
        rb = _boundary_residuals(problem, stacks)
        lb = _ordered_sum(rb * rb)
        g_bc = np.zeros(params.size)
        for res, bc in zip(rb, problem.boundary_conditions):
            g_bc += 2.0 * res * rows[bc.location][bc.derivative_order]
    else:
        lb, g_bc = 0.0, np.zeros(params.size)

    if mode is CombineMode.SUM:
        grad = g_int + g_bc
    else:
        grad = 2.0 * li * g_int + 2.0 * lb * g_bc
    return LossBreakdown(li, lb, combine(li, lb, mode), mode), grad


def loss_gradient(params: MlpParams, problem: BvpProblem, points,
                  mode: CombineMode | str = CombineMode.SUM, method: str = "auto") -> np.ndarray:
    return loss_and_gradient(params, problem, points, mode, method)[1]
