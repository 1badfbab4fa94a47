"""
Error tables, CSV export, and finite-difference checks of the derivative
and gradient machinery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .loss import CombineMode, loss_gradient, total_loss
from .network import MlpParams, derivatives, forward
from .problem import BvpProblem, MissingExactSolutionError, exact_solution
from .trainer import TrainRecord

TABLE_HEADER = ("x", "analytical", "numerical", "abs_error")
HISTORY_HEADER = ("epoch", "interior_loss", "boundary_loss", "total_loss")


class ReportIOError(OSError):
    pass


class TableRow(NamedTuple):
    x: float
    analytical: float
    numerical: float
    abs_error: float


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[TableRow, ...]

    @property
    def max_abs_error(self) -> float:
        return max(r.abs_error for r in self.rows)

    @property
    def mean_squared_error(self) -> float:
        return float(np.mean([r.abs_error**2 for r in self.rows]))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def format(self) -> str:
        lines = ["{:>6}  {:>12}  {:>12}  {:>12}".format("x", "analytical", "numerical", "abs_error")]
        for r in self.rows:
            lines.append(f"{r.x:6.2f}  {r.analytical:12.8f}  {r.numerical:12.8f}  {r.abs_error:12.8f}")
        lines.append(f"max abs error {self.max_abs_error:.8f}, mse {self.mean_squared_error:.3e}")
        return "\n".join(lines)


def table_grid(n: int = 11, domain=(0.0, 1.0)) -> np.ndarray:
    if n < 2:
        raise ValueError("a table grid needs at least 2 points")
    return np.linspace(domain[0], domain[1], n)


def build_table(params: MlpParams, problem: BvpProblem, grid=None) -> ErrorTable:
    if not problem.has_exact:
        raise MissingExactSolutionError(f"problem {problem.name!r} has no exact solution to compare against")
    xs = table_grid(11, problem.domain) if grid is None else np.asarray(grid, dtype=float)
    xs = np.sort(xs.reshape(-1))
    exact = exact_solution(problem, xs)
    pred = forward(params, xs)
    return ErrorTable(tuple(
        TableRow(float(x), float(a), float(y), float(abs(a - y)))
        for x, a, y in zip(xs, exact, pred)
    ))


# ---------------------------------------------------------------------------
# CSV


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_table_csv(table: ErrorTable, path) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for r in table.rows:
            w.writerow([f"{v:.8f}" for v in r])


def write_history_csv(history: Sequence[TrainRecord], path) -> None:
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for rec in history:
            w.writerow([str(rec.epoch)] + [f"{v:.17g}" for v in rec[1:]])


def export_csv(obj, path) -> None:
    """Write an :class:`ErrorTable` or a training history to ``path``."""
    if isinstance(obj, ErrorTable):
        write_table_csv(obj, path)
    else:
        write_history_csv(obj, path)


def _read_rows(path, header):
    path = Path(path)
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or tuple(rows[0]) != header:
        raise ValueError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def read_table_csv(path) -> ErrorTable:
    return ErrorTable(tuple(TableRow(*map(float, r)) for r in _read_rows(path, TABLE_HEADER)))


def read_history_csv(path) -> list[TrainRecord]:
    return [TrainRecord(int(r[0]), float(r[1]), float(r[2]), float(r[3]))
            for r in _read_rows(path, HISTORY_HEADER)]


# ---------------------------------------------------------------------------
# finite-difference oracles


def fd_check_derivatives(params: MlpParams, xs, max_order: int = 6, step: float = 1e-5,
                         floor: float = 1e-8) -> np.ndarray:
    """Worst relative error of ``y^(k)`` against a central difference of ``y^(k-1)``.

    Entry ``k - 1`` of the result covers order ``k``. Where the reference
    value is below ``floor`` in magnitude, the absolute error is used.
    """
    if not 1 <= max_order <= 6:
        raise ValueError("max_order must be in [1, 6]")
    xs = np.asarray(xs, dtype=float).reshape(-1)
    d = derivatives(params, xs, max_order)
    up = derivatives(params, xs + step, max_order - 1)
    dn = derivatives(params, xs - step, max_order - 1)
    fd = (up - dn) / (2 * step)                  # fd[:, k-1] ~ y^(k)
    analytic = d[:, 1:]
    err = np.abs(fd - analytic) / np.maximum(np.abs(analytic), floor)
    small = np.abs(analytic) < floor
    err[small] = np.abs(fd - analytic)[small]
    return err.max(axis=0)


def fd_gradient(params: MlpParams, problem: BvpProblem, points,
                mode: CombineMode | str = CombineMode.SUM, rel_step: float = 1e-6,
                stencil: int = 2) -> np.ndarray:
    """Central-difference gradient of the total loss, one parameter at a time.

    ``stencil=2`` is the classic ``(f(p+h) - f(p-h)) / 2h``; ``stencil=4``
    is the fourth-order central formula, which tolerates a larger step and
    so loses less to rounding when the loss itself is large.
    """
    if stencil not in (2, 4):
        raise ValueError("stencil must be 2 or 4")
    flat = params.flatten()
    out = np.zeros_like(flat)

    def f(i, offset):
        q = flat.copy()
        q[i] += offset
        return total_loss(params.with_flat(q), problem, points, mode).total

    for i in range(flat.size):
        h = rel_step * max(1.0, abs(flat[i]))
        if stencil == 2:
            out[i] = (f(i, h) - f(i, -h)) / (2 * h)
        else:
            out[i] = (8 * (f(i, h) - f(i, -h)) - (f(i, 2 * h) - f(i, -2 * h))) / (12 * h)
    return out


def fd_check_gradient(params: MlpParams, problem: BvpProblem, points,
                      mode: CombineMode | str = CombineMode.SUM, rel_tol: float = 1e-5,
                      abs_floor: float = 1e-8, rel_step: float = 1e-6,
                      stencil: int = 2) -> float:
    """Worst scaled discrepancy between ``loss_gradient`` and central differences.

    Each component's error is ``|g - fd| / max(|fd|, abs_floor / rel_tol)``,
    so a value ``<= rel_tol`` means every component is within ``rel_tol``
    relative or ``abs_floor`` absolute.
    """
    g = loss_gradient(params, problem, points, mode)
    fd = fd_gradient(params, problem, points, mode, rel_step, stencil)
    scale = np.maximum(np.abs(fd), abs_floor / rel_tol)
    return float(np.max(np.abs(g - fd) / scale))
