"""Scalar-to-scalar multilayer perceptron with hand-rolled backpropagation.

The network maps a one-dimensional index to a one-dimensional output through
``len(hidden)`` nonlinear layers and a final linear layer.  Parameters live in
one flat float64 vector; for each layer (in_dim, out_dim) the weight matrix is
stored row-major followed by the bias vector, layers in order from input to
output:

    [W0 (1 x h0), b0 (h0), W1 (h0 x h1), b1 (h1), ..., Wk (h_{k-1} x 1), bk (1)]

``layout`` returns the exact offsets; checkpoints serialize this vector as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericOverflowError, ShapeError

ACTIVATIONS = ("relu", "tanh", "softplus")

# MlpParams is just this flat vector; passed around together with its MlpSpec.
MlpParams = np.ndarray


@dataclass(frozen=True)
class MlpSpec:
    """Architecture of the link network: hidden widths plus activation tag.

    The default (two tanh layers of 16) is ample for smooth scalar links;
    wider nets fit the same shapes but noticeably inflate the sampling
    variability of the index direction at n in the low thousands.
    """

    hidden: tuple[int, ...] = (16, 16)
    activation: str = "tanh"

    def __post_init__(self):
        if len(self.hidden) < 1:
            raise ShapeError("network needs at least one hidden layer")
        if any(int(h) < 1 for h in self.hidden):
            raise ShapeError(f"hidden widths must be >= 1, got {self.hidden}")
        if self.activation not in ACTIVATIONS:
            raise ShapeError(
                f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}"
            )
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


@lru_cache(maxsize=128)
def layer_dims(spec: MlpSpec) -> tuple[tuple[int, int], ...]:
    """(in_dim, out_dim) for each layer, input to output."""
    dims = (1, *spec.hidden, 1)
    return tuple(zip(dims[:-1], dims[1:]))


@lru_cache(maxsize=128)
def n_params(spec: MlpSpec) -> int:
    return sum(i * o + o for i, o in layer_dims(spec))


def layout(spec: MlpSpec) -> list[dict]:
    """Offset table for the flat parameter vector (serialization contract)."""
    table = []
    off = 0
    for idx, (i, o) in enumerate(layer_dims(spec)):
        table.append({"layer": idx, "weight_offset": off, "weight_shape": [i, o],
                      "bias_offset": off + i * o, "bias_shape": [o]})
        off += i * o + o
    return table


def unpack(params: MlpParams, spec: MlpSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views (no copies) of each layer's (W, b) inside the flat vector."""
    if params.shape != (n_params(spec),):
        raise ShapeError(
            f"parameter vector has length {params.shape}, spec needs {n_params(spec)}"
        )
    out = []
    off = 0
    for i, o in layer_dims(spec):
        W = params[off : off + i * o].reshape(i, o)
        b = params[off + i * o : off + i * o + o]
        out.append((W, b))
        off += i * o + o
    return out


def he_init(rng: np.random.Generator, spec: MlpSpec) -> MlpParams:
    """Weights N(0, 2/fan_in) per layer, biases zero."""
    flat = np.zeros(n_params(spec))
    for W, _b in unpack(flat, spec):
        fan_in = W.shape[0]
        W[...] = rng.standard_normal(W.shape) * np.sqrt(2.0 / fan_in)
    return flat


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    # softplus, overflow-safe: log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _activate_deriv(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return 1.0 - a * a
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    # softplus' = sigmoid
    return 1.0 / (1.0 + np.exp(-z))


class Tape:
    """Activation cache from one forward pass, consumed by backward."""

    __slots__ = ("spec", "layers", "inputs", "zs", "acts", "n")

    def __init__(self, spec, layers, inputs, zs, acts, n):
        self.spec = spec
        self.layers = layers
        self.inputs = inputs
        self.zs = zs
        self.acts = acts
        self.n = n


def forward(
    params: MlpParams,
    spec: MlpSpec,
    s: np.ndarray,
    layers: list[tuple[np.ndarray, np.ndarray]] | None = None,
) -> tuple[np.ndarray, Tape]:
    """Evaluate g(s) for a batch of index values; returns (outputs, tape).

    ``layers`` lets a training loop reuse pre-unpacked (W, b) views.  Finite
    checks run on the output only; when that fails the pass is replayed
    layer by layer to name the offending layer.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1:
        raise ShapeError(f"index values must be a 1-d vector, got shape {s.shape}")
    if layers is None:
        layers = unpack(params, spec)
    a = s[:, None]
    inputs, zs, acts = [a], [], []
    last = len(layers) - 1
    out = None
    for idx, (W, b) in enumerate(layers):
        z = a @ W + b
        if idx == last:
            out = z
            break
        a = _activate(z, spec.activation)
        zs.append(z)
        acts.append(a)
        inputs.append(a)
    if not np.isfinite(out).all():
        _name_overflow_layer(layers, spec, s)
    return out[:, 0], Tape(spec, layers, inputs, zs, acts, s.shape[0])


def _name_overflow_layer(layers, spec: MlpSpec, s: np.ndarray) -> None:
    """Replay the forward pass to locate the first non-finite layer."""
    a = s[:, None]
    last = len(layers) - 1
    for idx, (W, b) in enumerate(layers):
        z = a @ W + b
        if not np.isfinite(z).all():
            name = "output layer" if idx == last else f"hidden layer {idx}"
            raise NumericOverflowError(f"non-finite values in {name}")
        a = _activate(z, spec.activation)
    raise NumericOverflowError("non-finite values in output layer")


def backward(
    tape: Tape,
    upstream: np.ndarray,
    grad_out: np.ndarray | None = None,
    grad_views: list[tuple[np.ndarray, np.ndarray]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum_i upstream_i * g(s_i) w.r.t. the flat params and each s_i.

    ``grad_out``/``grad_views`` let a training loop write into preallocated
    storage instead of allocating per call.
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (tape.n,):
        raise ShapeError(
            f"upstream has shape {upstream.shape}, forward batch had {tape.n} rows"
        )
    spec = tape.spec
    if grad_out is None:
        grad_out = np.empty(n_params(spec))
    if grad_views is None:
        grad_views = unpack(grad_out, spec)
    delta = upstream[:, None]
    for idx in range(len(tape.layers) - 1, -1, -1):
        W, _b = tape.layers[idx]
        gW, gb = grad_views[idx]
        a_in = tape.inputs[idx]
        np.matmul(a_in.T, delta, out=gW)
        delta.sum(axis=0, out=gb)
        delta = delta @ W.T
        if idx > 0:
            delta *= _activate_deriv(tape.zs[idx - 1], tape.acts[idx - 1],
                                     spec.activation)
    return grad_out, delta[:, 0]


def evaluate(params: MlpParams, spec: MlpSpec, s: np.ndarray) -> np.ndarray:
    """Forward pass without keeping the tape."""
    out, _ = forward(params, spec, s)
    return out
