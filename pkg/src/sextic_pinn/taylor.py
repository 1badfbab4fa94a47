"""
Truncated univariate Taylor series ("jets") and scalar activations.

A jet of order K stores the first K+1 normalized Taylor coefficients
``c[k] = f^(k)(x0) / k!`` of a function of one variable. Arithmetic on jets
is exact up to truncation, so pushing ``jet_variable(x0)`` through a
composed expression yields all derivatives up to order K at ``x0``.

The array helpers (:func:`series_mul`, :func:`series_compose`) work on
arrays whose *leading* axis is the coefficient index; any trailing axes are
broadcast. The network module uses them directly on batches of points and
neurons; :class:`TaylorJet` is the scalar convenience wrapper.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

DEFAULT_ORDER = 7
MAX_ORDER = 7

_INV_FACTORIALS = np.array([1.0 / math.factorial(k) for k in range(MAX_ORDER + 2)])


class OrderMismatchError(ValueError):
    pass


class UnsupportedActivationError(ValueError):
    pass


class ActivationKind(str, enum.Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    LINEAR = "linear"
    SOFTMAX = "softmax"

    @property
    def differentiable(self) -> bool:
        return self is not ActivationKind.SOFTMAX


# ---------------------------------------------------------------------------
# array-level series arithmetic


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated Cauchy product along axis 0; trailing axes broadcast."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] != b.shape[0]:
        raise OrderMismatchError(
            f"cannot multiply jets of order {a.shape[0] - 1} and {b.shape[0] - 1}"
        )
    n = a.shape[0]
    out = np.zeros((n,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]))
    for k in range(n):
        acc = a[0] * b[k]
        for j in range(1, k + 1):
            acc = acc + a[j] * b[k - j]
        out[k] = acc
    return out


def series_compose(derivs: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Coefficients of ``f(a(t))`` given ``derivs[j] = f^(j)(a[0])``.

    ``derivs`` needs at least ``len(a)`` entries along axis 0; extra ones are
    ignored. Uses Horner's rule on the shifted series ``a - a[0]``, which is
    the formal power-series form of Faa di Bruno's formula.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    derivs = np.asarray(derivs, dtype=float)[:n]
    if derivs.shape[0] < n:
        raise OrderMismatchError(
            f"need {n} derivatives for an order-{n - 1} jet, got {derivs.shape[0]}"
        )
    h = a.copy()
    h[0] = 0.0
    taylor = derivs * _INV_FACTORIALS[:n].reshape((n,) + (1,) * (derivs.ndim - 1))
    out = np.zeros(np.broadcast_shapes(a.shape, derivs.shape))
    out[0] = taylor[n - 1]
    for j in range(n - 2, -1, -1):
        out = series_mul(out, h)
        out[0] = out[0] + taylor[j]
    return out


# ---------------------------------------------------------------------------
# activation derivative chains


@lru_cache(maxsize=None)
def _derivative_polynomials(kind: ActivationKind, order: int) -> tuple[np.ndarray, ...]:
    # f' expressed through f itself: tanh' = 1 - t^2, sigmoid' = s - s^2.
    if kind is ActivationKind.TANH:
        chain = np.array([1.0, 0.0, -1.0])
    else:
        chain = np.array([0.0, 1.0, -1.0])
    polys = [np.array([0.0, 1.0])]
    for _ in range(order):
        polys.append(P.polymul(P.polyder(polys[-1]), chain))
    return tuple(polys)


def activation_value(kind: ActivationKind | str, z):
    kind = ActivationKind(kind)
    z = np.asarray(z, dtype=float)
    if kind is ActivationKind.TANH:
        return np.tanh(z)
    if kind is ActivationKind.SIGMOID:
        return _sigmoid(z)
    if kind is ActivationKind.LINEAR:
        return z
    raise UnsupportedActivationError(
        "softmax is vector-valued; use softmax() on a whole layer instead"
    )


def _sigmoid(z):
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def activation_derivs(kind: ActivationKind | str, z, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Return ``[f(z), f'(z), ..., f^(order)(z)]`` stacked along axis 0.

    ``z`` may be a scalar or an array; the result has shape
    ``(order + 1,) + np.shape(z)``.
    """
    kind = ActivationKind(kind)
    if not kind.differentiable:
        raise UnsupportedActivationError(
            f"{kind.value} has no scalar derivative chain (forward only)"
        )
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"derivative order must be in [0, {MAX_ORDER}], got {order}")
    z = np.asarray(z, dtype=float)
    out = np.zeros((order + 1,) + z.shape)
    if kind is ActivationKind.LINEAR:
        out[0] = z
        if order >= 1:
            out[1] = 1.0
        return out
    base = activation_value(kind, z)
    for k, poly in enumerate(_derivative_polynomials(kind, order)):
        out[k] = P.polyval(base, poly)
    return out


def softmax(z: Sequence[float] | np.ndarray, axis: int = -1) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    shifted = np.exp(z - np.max(z, axis=axis, keepdims=True))
    return shifted / np.sum(shifted, axis=axis, keepdims=True)


def softmax_jacobian(z: Sequence[float] | np.ndarray) -> np.ndarray:
    """``J[i, j] = s_i (delta_ij - s_j)`` for a single input vector."""
    s = softmax(z)
    return np.diag(s) - np.outer(s, s)


# ---------------------------------------------------------------------------
# scalar jets


class TaylorJet:
    """Immutable truncated Taylor series of a scalar function."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence[float] | np.ndarray):
        c = np.array(coeffs, dtype=float).reshape(-1)
        if c.size == 0:
            raise ValueError("a jet needs at least one coefficient")
        c.setflags(write=False)
        self._coeffs = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def order(self) -> int:
        return self._coeffs.size - 1

    def derivative(self, k: int) -> float:
        if not 0 <= k <= self.order:
            raise IndexError(f"derivative order {k} outside [0, {self.order}]")
        return float(self._coeffs[k] * math.factorial(k))

    def derivatives(self) -> np.ndarray:
        return self._coeffs * np.array([math.factorial(k) for k in range(self.order + 1)])

    def _check(self, other: "TaylorJet") -> None:
        if other.order != self.order:
            raise OrderMismatchError(
                f"jet orders differ: {self.order} vs {other.order}"
            )

    def __add__(self, other):
        if isinstance(other, TaylorJet):
            self._check(other)
            return TaylorJet(self._coeffs + other._coeffs)
        c = self._coeffs.copy()
        c[0] += other
        return TaylorJet(c)

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet(-self._coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TaylorJet):
            self._check(other)
            return TaylorJet(series_mul(self._coeffs, other._coeffs))
        return TaylorJet(self._coeffs * float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, TaylorJet) and np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self):
        return hash(self._coeffs.tobytes())

    def __repr__(self):
        return f"TaylorJet({self._coeffs.tolist()})"


def jet_variable(x0: float, order: int = DEFAULT_ORDER) -> TaylorJet:
    if order < 0:
        raise ValueError("jet order must be non-negative")
    c = np.zeros(order + 1)
    c[0] = x0
    if order >= 1:
        c[1] = 1.0
    return TaylorJet(c)


def jet_constant(value: float, order: int = DEFAULT_ORDER) -> TaylorJet:
    c = np.zeros(order + 1)
    c[0] = value
    return TaylorJet(c)


def jet_add(a: TaylorJet, b: TaylorJet) -> TaylorJet:
    return a + b


def jet_scale(a: TaylorJet, s: float) -> TaylorJet:
    return TaylorJet(a.coeffs * float(s))


def jet_mul(a: TaylorJet, b: TaylorJet) -> TaylorJet:
    return a * b


def jet_compose_activation(kind: ActivationKind | str, a: TaylorJet) -> TaylorJet:
    kind = ActivationKind(kind)
    if kind is ActivationKind.LINEAR:
        return a
    d = activation_derivs(kind, a.coeffs[0], a.order)
    return TaylorJet(series_compose(d, a.coeffs))


def derivative_of(a: TaylorJet, k: int) -> float:
    return a.derivative(k)
