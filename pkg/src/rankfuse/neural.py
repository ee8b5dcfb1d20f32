"""A small multi-layer perceptron with hand-written gradients.

The networks used here are tiny (at most 64 units wide), so instead of
pulling in an autodiff framework the forward and backward passes are
spelled out directly and cross-checked against finite differences in the
tests.  Hidden layers are rectified; the output layer is linear,
logistic, or softmax.  ``backward`` always produces the gradient with
respect to the input vector as well, which is how a frozen network can
sit downstream of a trainable one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Adam",
    "GradientTape",
    "Mlp",
    "Sgd",
    "backward",
    "forward",
    "load_mlp",
    "save_mlp",
    "sgd_step",
]

OUTPUT_ACTIVATIONS = ("linear", "logistic", "softmax")

CHECKPOINT_FORMAT = 1


@dataclass
class Mlp:
    """Fully-connected network: x @ W + b per layer, rectified between.

    ``weights[l]`` has shape (fan_in, fan_out); activations flow left to
    right.  Instances are plain containers — training code mutates the
    arrays in place through an optimizer, everything else only reads.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    output: str = "linear"

    def __post_init__(self) -> None:
        if self.output not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"output must be one of {OUTPUT_ACTIVATIONS}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias vector per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: bias shape does not match weights")
            if l > 0 and self.weights[l - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {l}: fan-in does not match previous layer")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")

    @classmethod
    def init(
        cls,
        layer_sizes: Sequence[int],
        rng: np.random.Generator,
        output: str = "linear",
    ) -> "Mlp":
        """Uniform(-a, a) weights with a = sqrt(6/(fan_in+fan_out)), zero biases."""
        sizes = list(layer_sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError("need input and output sizes, all positive")
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            a = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return cls(weights=weights, biases=biases, output=output)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))


@dataclass
class GradientTape:
    """Per-parameter gradients plus the gradient at the network input."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]
    d_input: np.ndarray


def _apply_output(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "logistic":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    shifted = np.exp(z - z.max())
    return shifted / shifted.sum()


def forward(net: Mlp, x: Sequence[float]) -> np.ndarray:
    """Deterministic forward pass on a single input vector."""
    h = np.asarray(x, dtype=float)
    if h.shape != (net.weights[0].shape[0],):
        raise ValueError(
            f"input size {h.shape} does not match d0={net.weights[0].shape[0]}"
        )
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
    z = h @ net.weights[-1] + net.biases[-1]
    return _apply_output(z, net.output)


def backward(net: Mlp, x: Sequence[float], upstream: Sequence[float]) -> GradientTape:
    """Gradients of ``upstream . forward(net, x)`` for every parameter and x.

    ``upstream`` is the loss gradient at the network output.  The
    rectifier contributes derivative 0 exactly at the kink.
    """
    x = np.asarray(x, dtype=float)
    upstream = np.asarray(upstream, dtype=float)
    acts = [x]
    pre = []
    h = x
    if h.shape != (net.weights[0].shape[0],):
        raise ValueError("input size does not match network")
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    z_out = h @ net.weights[-1] + net.biases[-1]
    y = _apply_output(z_out, net.output)
    if upstream.shape != y.shape:
        raise ValueError("upstream gradient size does not match output")

    if net.output == "linear":
        g = upstream.copy()
    elif net.output == "logistic":
        g = upstream * y * (1.0 - y)
    else:  # softmax Jacobian: s * (u - u.s)
        g = y * (upstream - float(upstream @ y))

    d_weights = [np.empty_like(w) for w in net.weights]
    d_biases = [np.empty_like(b) for b in net.biases]
    for l in range(len(net.weights) - 1, -1, -1):
        d_weights[l][:] = np.outer(acts[l], g)
        d_biases[l][:] = g
        g = net.weights[l] @ g
        if l > 0:
            g = g * (pre[l - 1] > 0.0)
    return GradientTape(d_weights=d_weights, d_biases=d_biases, d_input=g)


# ---------------------------------------------------------------------------
# Optimizers


def _check_finite(tape: GradientTape) -> None:
    for arr in (*tape.d_weights, *tape.d_biases):
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite gradient; training aborted")


def sgd_step(net: Mlp, tape: GradientTape, lr: float) -> Mlp:
    """One plain gradient step, mutating the network in place."""
    _check_finite(tape)
    for w, b, dw, db in zip(net.weights, net.biases, tape.d_weights, tape.d_biases):
        w -= lr * dw
        b -= lr * db
    return net


@dataclass
class Sgd:
    """Gradient descent with optional heavy-ball momentum."""

    lr: float = 1e-3
    momentum: float = 0.0
    _velocity: list[np.ndarray] | None = field(default=None, repr=False)

    def step(self, net: Mlp, tape: GradientTape) -> Mlp:
        _check_finite(tape)
        if self.momentum == 0.0:
            return sgd_step(net, tape, self.lr)
        grads = [*tape.d_weights, *tape.d_biases]
        if self._velocity is None:
            self._velocity = [np.zeros_like(g) for g in grads]
        params = [*net.weights, *net.biases]
        for p, v, g in zip(params, self._velocity, grads):
            v *= self.momentum
            v -= self.lr * g
            p += v
        return net


@dataclass
class Adam:
    """Per-parameter adaptive steps; the default optimizer here."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    _m: list[np.ndarray] | None = field(default=None, repr=False)
    _v: list[np.ndarray] | None = field(default=None, repr=False)
    _t: int = field(default=0, repr=False)

    def step(self, net: Mlp, tape: GradientTape) -> Mlp:
        _check_finite(tape)
        grads = [*tape.d_weights, *tape.d_biases]
        if self._m is None:
            self._m = [np.zeros_like(g) for g in grads]
            self._v = [np.zeros_like(g) for g in grads]
        self._t += 1
        params = [*net.weights, *net.biases]
        bc1 = 1.0 - self.beta1**self._t
        bc2 = 1.0 - self.beta2**self._t
        for p, m, v, g in zip(params, self._m, self._v, grads):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        return net


# ---------------------------------------------------------------------------
# Checkpoints


def save_mlp(net: Mlp, path: str) -> None:
    """JSON checkpoint; float repr keeps the round-trip bit-exact."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "layer_sizes": list(net.layer_sizes),
        "output": net.output,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_mlp(path: str) -> Mlp:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {doc.get('format')!r}")
    net = Mlp(
        weights=[np.array(w, dtype=float) for w in doc["weights"]],
        biases=[np.array(b, dtype=float) for b in doc["biases"]],
        output=doc["output"],
    )
    if list(net.layer_sizes) != doc["layer_sizes"]:
        raise ValueError("checkpoint layer sizes do not match its arrays")
    return net
