"""
Scalar-input, scalar-output multilayer perceptron.

Besides the plain forward pass, the network can return the input
derivatives ``[y, y', ..., y^(K)]`` at a batch of points (by pushing a
Taylor jet through every layer) and the exact Jacobian of each of those
derivatives with respect to every parameter (by carrying one tangent jet
per parameter alongside the primal jet).

Flattened parameter order: layer by layer, each layer's weight matrix
row-major (rows = fan_out) followed by its bias vector.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .taylor import (
    MAX_ORDER,
    ActivationKind,
    UnsupportedActivationError,
    activation_derivs,
    activation_value,
    series_compose,
    series_mul,
    softmax,
)

CHECKPOINT_FORMAT = "sextic-pinn-checkpoint/1"
MAX_JACOBIAN_ORDER = MAX_ORDER - 1


class InitScheme(str, enum.Enum):
    GLOROT_UNIFORM = "glorot_uniform"
    GLOROT_NORMAL = "glorot_normal"


@dataclass(frozen=True)
class NetworkConfig:
    hidden_sizes: tuple[int, ...] = (16,)
    hidden_activation: ActivationKind = ActivationKind.TANH
    init_scheme: InitScheme = InitScheme.GLOROT_NORMAL
    seed: int = 42
    input_dim: int = 1
    output_activation: ActivationKind = ActivationKind.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "hidden_activation", ActivationKind(self.hidden_activation))
        object.__setattr__(self, "output_activation", ActivationKind(self.output_activation))
        object.__setattr__(self, "init_scheme", InitScheme(self.init_scheme))
        if self.input_dim != 1:
            raise ValueError("only scalar inputs are supported (input_dim = 1)")
        if self.output_activation is not ActivationKind.LINEAR:
            raise ValueError("the output layer is always linear")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden_sizes must be non-empty and positive, got {self.hidden_sizes}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (1, *self.hidden_sizes, 1)

    def to_dict(self) -> dict:
        return {
            "hidden_sizes": list(self.hidden_sizes),
            "hidden_activation": self.hidden_activation.value,
            "output_activation": self.output_activation.value,
            "init_scheme": self.init_scheme.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(
            hidden_sizes=tuple(d["hidden_sizes"]),
            hidden_activation=d["hidden_activation"],
            output_activation=d.get("output_activation", "linear"),
            init_scheme=d["init_scheme"],
            seed=d["seed"],
        )


@dataclass
class MlpParams:
    """Weights ``W[l]`` of shape (fan_out, fan_in) and biases ``b[l]``."""

    config: NetworkConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.biases = [np.asarray(b, dtype=float).reshape(-1) for b in self.biases]
        sizes = self.config.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("number of layers does not match the configuration")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(
                    f"layer {l}: expected W {(sizes[l + 1], sizes[l])}, b {(sizes[l + 1],)}; "
                    f"got W {w.shape}, b {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l} contains non-finite entries")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def activation(self, layer: int) -> ActivationKind:
        if layer == self.n_layers - 1:
            return self.config.output_activation
        return self.config.hidden_activation

    def offsets(self) -> list[tuple[int, int]]:
        """(start of W, start of b) for every layer in the flat vector."""
        out, pos = [], 0
        for w, b in zip(self.weights, self.biases):
            out.append((pos, pos + w.size))
            pos += w.size + b.size
        return out

    def flatten(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.reshape(-1))
            parts.append(b)
        return np.concatenate(parts)

    def with_flat(self, flat: np.ndarray) -> "MlpParams":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.size,):
            raise ValueError(f"expected {self.size} parameters, got {flat.shape}")
        weights, biases, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(flat[pos : pos + w.size].reshape(w.shape).copy())
            pos += w.size
            biases.append(flat[pos : pos + b.size].copy())
            pos += b.size
        return MlpParams(self.config, weights, biases)

    def parameter_names(self) -> list[str]:
        names = []
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            names += [f"W{l}[{r},{c}]" for r in range(w.shape[0]) for c in range(w.shape[1])]
            names += [f"b{l}[{r}]" for r in range(b.size)]
        return names


def glorot_scale(fan_in: int, fan_out: int, scheme: InitScheme | str) -> float:
    """Standard deviation (normal) or half-width (uniform) of the initializer."""
    scheme = InitScheme(scheme)
    if scheme is InitScheme.GLOROT_NORMAL:
        return math.sqrt(2.0 / (fan_in + fan_out))
    return math.sqrt(6.0 / (fan_in + fan_out))


def glorot_draw(rng: np.random.Generator, fan_in: int, fan_out: int,
                scheme: InitScheme | str, size=None) -> np.ndarray:
    scheme = InitScheme(scheme)
    shape = (fan_out, fan_in) if size is None else size
    scale = glorot_scale(fan_in, fan_out, scheme)
    if scheme is InitScheme.GLOROT_NORMAL:
        return rng.normal(0.0, scale, size=shape)
    return rng.uniform(-scale, scale, size=shape)


def init(config: NetworkConfig) -> MlpParams:
    """Glorot-initialized weights, zero biases.

    Draws come from numpy's PCG64 generator seeded with ``config.seed``
    (``np.random.default_rng``), one layer at a time in layer order.
    """
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights = [glorot_draw(rng, sizes[l], sizes[l + 1], config.init_scheme)
               for l in range(len(sizes) - 1)]
    biases = [np.zeros(sizes[l + 1]) for l in range(len(sizes) - 1)]
    return MlpParams(config, weights, biases)


def _check_supported(params: MlpParams) -> None:
    for l in range(params.n_layers):
        if not params.activation(l).differentiable:
            raise UnsupportedActivationError(
                f"layer {l} uses {params.activation(l).value}, which has no derivative chain"
            )


def forward(params: MlpParams, x):
    """Network output at ``x`` (scalar or 1-d array)."""
    xs = np.asarray(x, dtype=float)
    a = xs.reshape(-1, 1)
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        kind = params.activation(l)
        if kind is ActivationKind.SOFTMAX:
            a = softmax(z, axis=-1)
        else:
            a = activation_value(kind, z)
    out = a[:, 0]
    return float(out[0]) if xs.ndim == 0 else out


def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(order + 1)], dtype=float)


def _input_jet(xs: np.ndarray, order: int) -> np.ndarray:
    jet = np.zeros((order + 1, xs.size, 1))
    jet[0, :, 0] = xs
    if order >= 1:
        jet[1] = 1.0
    return jet


def _propagate(params: MlpParams, xs: np.ndarray, order: int, tangents: bool):
    """Push the input jet through all layers.

    Returns the output jet, shape (order+1, n), and, if requested, the
    tangent jets of shape (P, order+1, n), where ``P`` is the number of
    parameters and entry ``p`` is the jet of the output's partial derivative
    with respect to flattened parameter ``p``.
    """
    a = _input_jet(xs, order)
    n_pts = xs.size
    n_par = params.size
    ta = np.zeros((n_par, order + 1, n_pts, 1)) if tangents else None
    for l, ((w_off, b_off), w, b) in enumerate(zip(params.offsets(), params.weights, params.biases)):
        fan_out, fan_in = w.shape
        z = np.einsum("kni,oi->kno", a, w)
        z[0] += b
        if tangents:
            tz = np.einsum("pkni,oi->pkno", ta, w)
            # d z_o / d W[o, i] = a_i ; d z_o / d b[o] = 1
            for o in range(fan_out):
                tz[w_off + o * fan_in : w_off + (o + 1) * fan_in, :, :, o] += a.transpose(2, 0, 1)
                tz[b_off + o, 0, :, o] += 1.0
        kind = params.activation(l)
        if kind is ActivationKind.LINEAR:
            a = z
            ta = tz if tangents else None
            continue
        d = activation_derivs(kind, z[0], order + 1 if tangents else order)
        a = series_compose(d[: order + 1], z)
        if tangents:
            slope = series_compose(d[1:], z)
            ta = series_mul(slope[:, None], tz.transpose(1, 0, 2, 3)).transpose(1, 0, 2, 3)
    return a[:, :, 0], (ta[:, :, :, 0] if tangents else None)


def derivatives(params: MlpParams, x, order: int = 6) -> np.ndarray:
    """``[y, y', ..., y^(order)]`` at ``x``.

    Shape ``(order + 1,)`` for scalar ``x``, ``(n, order + 1)`` for a 1-d array.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}], got {order}")
    _check_supported(params)
    xs = np.asarray(x, dtype=float)
    jet, _ = _propagate(params, xs.reshape(-1), order, tangents=False)
    out = (jet * _factorials(order)[:, None]).T
    return out[0] if xs.ndim == 0 else out


def derivative_param_jacobian(params: MlpParams, x, order: int = 6,
                              method: str = "auto") -> np.ndarray:
    """Exact ``d y^(k) / d p`` for k = 0..order and every flattened parameter.

    Shape ``(order + 1, P)`` for scalar ``x``, ``(n, order + 1, P)`` for a
    1-d array. ``method`` is ``"jet"`` (tangent-jet propagation, any depth),
    ``"closed_form"`` (one hidden layer only) or ``"auto"``.
    """
    if not 0 <= order <= MAX_JACOBIAN_ORDER:
        raise ValueError(f"order must be in [0, {MAX_JACOBIAN_ORDER}], got {order}")
    _check_supported(params)
    xs = np.asarray(x, dtype=float)
    flat_x = xs.reshape(-1)
    if method == "auto":
        method = "closed_form" if params.n_layers == 2 else "jet"
    if method == "closed_form":
        jac = _single_layer_jacobian(params, flat_x, order)
    elif method == "jet":
        _, tangents = _propagate(params, flat_x, order, tangents=True)
        jac = (tangents * _factorials(order)[None, :, None]).transpose(2, 1, 0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return jac[0] if xs.ndim == 0 else jac


def derivatives_and_jacobian(params: MlpParams, xs: np.ndarray, order: int = 6,
                             method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Both of the above for a 1-d batch, sharing the activation work."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    _check_supported(params)
    if method == "auto":
        method = "closed_form" if params.n_layers == 2 else "jet"
    if method == "closed_form":
        return _single_layer_both(params, xs, order)
    jet, tangents = _propagate(params, xs, order, tangents=True)
    fact = _factorials(order)
    return (jet * fact[:, None]).T, (tangents * fact[None, :, None]).transpose(2, 1, 0)


def _single_layer_both(params: MlpParams, xs: np.ndarray, order: int):
    if params.n_layers != 2:
        raise ValueError("closed-form Jacobian needs exactly one hidden layer")
    w = params.weights[0][:, 0]
    b = params.biases[0]
    v = params.weights[1][0]
    c = params.biases[1][0]
    z = np.outer(xs, w) + b                                    # (n, H)
    sig = activation_derivs(params.config.hidden_activation, z, order + 1)  # (K+2, n, H)
    k = np.arange(order + 1)
    wk = w[None, :] ** k[:, None]                              # (K+1, H)
    # k * w^(k-1), with the k = 0 row identically zero
    dwk = np.zeros_like(wk)
    dwk[1:] = k[1:, None] * w[None, :] ** (k[1:, None] - 1)

    d_v = wk[None] * sig[: order + 1].transpose(1, 0, 2)       # (n, K+1, H)
    d_b = v * wk[None] * sig[1:].transpose(1, 0, 2)
    d_w = v * (dwk[None] * sig[: order + 1].transpose(1, 0, 2)
               + xs[:, None, None] * wk[None] * sig[1:].transpose(1, 0, 2))
    d_c = np.zeros((xs.size, order + 1, 1))
    d_c[:, 0, 0] = 1.0
    jac = np.concatenate([d_w, d_b, d_v, d_c], axis=2)

    derivs = np.einsum("nkh,h->nk", d_v, v)
    derivs[:, 0] += c
    return derivs, jac


def _single_layer_jacobian(params: MlpParams, xs: np.ndarray, order: int) -> np.ndarray:
    return _single_layer_both(params, xs, order)[1]


# ---------------------------------------------------------------------------
# checkpoints


def params_to_dict(params: MlpParams) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "config": params.config.to_dict(),
        "layers": [
            {"weights": w.tolist(), "biases": b.tolist()}
            for w, b in zip(params.weights, params.biases)
        ],
    }


def params_from_dict(d: dict) -> MlpParams:
    if d.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} document")
    config = NetworkConfig.from_dict(d["config"])
    layers = d["layers"]
    return MlpParams(
        config,
        [np.array(layer["weights"], dtype=float) for layer in layers],
        [np.array(layer["biases"], dtype=float) for layer in layers],
    )


def save_checkpoint(params: MlpParams, path) -> None:
    """Write a JSON checkpoint.

    Floats are written with Python's shortest round-trip repr, so loading
    restores every parameter bit for bit.
    """
    Path(path).write_text(json.dumps(params_to_dict(params), indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path) -> MlpParams:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
        return params_from_dict(d)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"corrupt checkpoint {path}: {exc}") from exc
