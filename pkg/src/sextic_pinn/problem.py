"""Sixth-order boundary value problems in residual form ``R(x, y, ..., y^(6)) = 0``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

N_DERIVS = 7  # y, y', ..., y^(6)

ResidualFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ExactFn = Callable[[np.ndarray, int], np.ndarray]


class UnknownProblemError(KeyError):
    pass


class MissingExactSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryCondition:
    location: float
    derivative_order: int
    target: float

    def __post_init__(self):
        if not 0 <= self.derivative_order <= 5:
            raise ValueError(f"boundary derivative order must be in [0, 5], got {self.derivative_order}")


@dataclass(frozen=True)
class BvpProblem:
    """A sixth-order BVP on ``domain = (a, b)``.

    ``residual(x, derivs)`` and ``residual_partials(x, derivs)`` are
    vectorized: ``x`` has shape (n,), ``derivs`` shape (n, 7) holding
    ``y, y', ..., y^(6)``. The first returns shape (n,), the second
    (n, 7) with ``dR/dy_k`` in column k.

    ``exact(x, k)``, when present, returns the k-th derivative of the
    analytic solution.
    """

    name: str
    domain: tuple[float, float]
    residual_fn: ResidualFn
    partials_fn: ResidualFn
    boundary_conditions: tuple[BoundaryCondition, ...]
    exact: Optional[ExactFn] = None
    description: str = field(default="", compare=False)

    def __post_init__(self):
        a, b = self.domain
        if not a < b:
            raise ValueError(f"empty domain {self.domain}")
        for bc in self.boundary_conditions:
            if bc.location not in (a, b):
                raise ValueError(f"boundary condition at {bc.location} is not an endpoint of {self.domain}")

    @property
    def has_exact(self) -> bool:
        return self.exact is not None

    def boundary_locations(self) -> list[float]:
        return sorted({bc.location for bc in self.boundary_conditions})


def _as_batch(x, derivs):
    xs = np.asarray(x, dtype=float)
    d = np.asarray(derivs, dtype=float)
    scalar = xs.ndim == 0
    xs = xs.reshape(-1)
    d = d.reshape(xs.size, N_DERIVS)
    return scalar, xs, d


def residual(problem: BvpProblem, x, derivs):
    scalar, xs, d = _as_batch(x, derivs)
    r = problem.residual_fn(xs, d)
    return float(r[0]) if scalar else r


def residual_partials(problem: BvpProblem, x, derivs) -> np.ndarray:
    scalar, xs, d = _as_batch(x, derivs)
    g = problem.partials_fn(xs, d)
    return g[0] if scalar else g


def exact_solution(problem: BvpProblem, x, order: int = 0):
    if problem.exact is None:
        raise MissingExactSolutionError(f"problem {problem.name!r} has no exact solution")
    xs = np.asarray(x, dtype=float)
    y = np.asarray(problem.exact(xs.reshape(-1), order), dtype=float)
    return float(y[0]) if xs.ndim == 0 else y


def exact_derivative_stack(problem: BvpProblem, x) -> np.ndarray:
    """Analytic ``[y, ..., y^(6)]``, shape (n, 7)."""
    xs = np.asarray(x, dtype=float).reshape(-1)
    return np.stack([exact_solution(problem, xs, k) for k in range(N_DERIVS)], axis=1)


def check_partials(problem: BvpProblem, x, derivs, step: float = 1e-6) -> float:
    """Worst relative disagreement between ``residual_partials`` and central differences.

    Differences smaller than ``1e-8`` in magnitude are compared absolutely.
    """
    _, xs, d = _as_batch(x, derivs)
    analytic = problem.partials_fn(xs, d)
    worst = 0.0
    for k in range(N_DERIVS):
        h = step * np.maximum(1.0, np.abs(d[:, k]))
        up, dn = d.copy(), d.copy()
        up[:, k] += h
        dn[:, k] -= h
        fd = (problem.residual_fn(xs, up) - problem.residual_fn(xs, dn)) / (2 * h)
        err = np.abs(fd - analytic[:, k]) / np.maximum(np.abs(analytic[:, k]), 1e-8)
        worst = max(worst, float(np.max(err)))
    return worst


def make_problem(name, domain, residual_fn, partials_fn, boundary_conditions,
                 exact=None, description="", validate=True, tol=1e-6, seed=0) -> BvpProblem:
    """Build a user-defined problem, cross-checking the hand-written partials.

    With ``validate`` the partials are compared to finite differences at
    random states inside the domain; a mismatch above ``tol`` raises
    ``ValueError``.
    """
    problem = BvpProblem(name, tuple(map(float, domain)), residual_fn, partials_fn,
                         tuple(boundary_conditions), exact, description)
    if validate:
        rng = np.random.default_rng(seed)
        xs = rng.uniform(*problem.domain, size=16)
        d = rng.uniform(-2.0, 2.0, size=(16, N_DERIVS))
        worst = check_partials(problem, xs, d)
        if worst > tol:
            raise ValueError(
                f"residual_partials of {name!r} disagree with finite differences "
                f"(worst relative error {worst:.3e})"
            )
    return problem


# ---------------------------------------------------------------------------
# built-in benchmarks

E = math.e


def _ex1_residual(x, d):
    return d[:, 6] - d[:, 0] + 6.0 * np.exp(x)


def _ex1_partials(x, d):
    g = np.zeros_like(d)
    g[:, 0] = -1.0
    g[:, 6] = 1.0
    return g


def _ex1_exact(x, k):
    # y = (1 - x) e^x  =>  y^(k) = (1 - k - x) e^x
    return (1.0 - k - x) * np.exp(x)


def _ex2_residual(x, d):
    return d[:, 6] - np.exp(-x) * d[:, 0] ** 2


def _ex2_partials(x, d):
    g = np.zeros_like(d)
    g[:, 0] = -2.0 * np.exp(-x) * d[:, 0]
    g[:, 6] = 1.0
    return g


def _ex2_exact(x, k):
    return np.exp(x)


def _example1() -> BvpProblem:
    bcs = (
        BoundaryCondition(0.0, 0, 1.0),
        BoundaryCondition(0.0, 2, -1.0),
        BoundaryCondition(0.0, 4, -3.0),
        BoundaryCondition(1.0, 0, 0.0),
        BoundaryCondition(1.0, 2, -2.0 * E),
        BoundaryCondition(1.0, 4, -4.0 * E),
    )
    return BvpProblem(
        "example1", (0.0, 1.0), _ex1_residual, _ex1_partials, bcs, _ex1_exact,
        "linear: y^(6) - y = -6 e^x on (0, 1), exact y = (1 - x) e^x",
    )


def _example2() -> BvpProblem:
    bcs = (
        BoundaryCondition(0.0, 0, 1.0),
        BoundaryCondition(0.0, 2, 1.0),
        BoundaryCondition(0.0, 4, 1.0),
        BoundaryCondition(1.0, 0, E),
        BoundaryCondition(1.0, 2, E),
        BoundaryCondition(1.0, 4, E),
    )
    return BvpProblem(
        "example2", (0.0, 1.0), _ex2_residual, _ex2_partials, bcs, _ex2_exact,
        "nonlinear: y^(6) = e^(-x) y^2 on (0, 1), exact y = e^x",
    )


_BUILTINS = {"example1": _example1, "example2": _example2}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> BvpProblem:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; valid problems: {', '.join(builtin_names())}"
        ) from None
