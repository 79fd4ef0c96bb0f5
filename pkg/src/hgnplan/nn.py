"""Dense numeric kernel: MLPs with LeakyReLU, exact reverse-mode gradients,
MSE and Adam with coupled L2 weight decay. Everything is float64 numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_LEAKY_SLOPE = 0.01


def leaky_relu(x: np.ndarray, slope: float = DEFAULT_LEAKY_SLOPE) -> np.ndarray:
    if not 0 < slope < 1:
        raise ValueError("slope must be in (0, 1)")
    return np.where(x > 0, x, slope * x)


def mse(pred: float, target: float) -> float:
    return (pred - target) ** 2


@dataclass
class MlpParams:
    """Fully-connected layers; weight i has shape (out_i, in_i)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    slope: float = DEFAULT_LEAKY_SLOPE
    final_linear: bool = False  # skip the activation after the last layer

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weights/biases length mismatch")
        if not 0 < self.slope < 1:
            raise ValueError("slope must be in (0, 1)")
        for i in range(len(self.weights) - 1):
            if self.weights[i + 1].shape[1] != self.weights[i].shape[0]:
                raise ValueError("consecutive layer dimensions do not chain")
        for w, b in zip(self.weights, self.biases):
            if b.shape != (w.shape[0],):
                raise ValueError("bias shape does not match weight rows")

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases],
                         self.slope, self.final_linear)


def init_params(dims: list[int], seed: "int | np.random.SeedSequence",
                slope: float = DEFAULT_LEAKY_SLOPE,
                final_linear: bool = False) -> MlpParams:
    """Glorot-uniform weights from a seeded generator; zero biases."""
    if len(dims) < 2:
        raise ValueError("need at least an input and an output width")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpParams(weights, biases, slope, final_linear)


def mlp_forward(params: MlpParams, x: np.ndarray):
    """Apply the MLP to a row batch (n, in) -> (n, out); returns (y, cache)."""
    if x.ndim != 2 or x.shape[1] != params.in_width:
        raise ValueError(f"input shape {x.shape} does not match in-width {params.in_width}")
    inputs = []
    pre_acts = []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        z = h @ w.T + b
        pre_acts.append(z)
        if i == last and params.final_linear:
            h = z
        else:
            h = np.maximum(z, params.slope * z)  # LeakyReLU, slope < 1
    return h, (inputs, pre_acts)


def mlp_backward(params: MlpParams, cache, dy: np.ndarray):
    """Exact gradients of the forward map: returns (dweights, dbiases, dx)."""
    inputs, pre_acts = cache
    if dy.shape != (inputs[0].shape[0], params.out_width):
        raise ValueError(f"upstream gradient shape {dy.shape} does not match output")
    dweights = [None] * len(params.weights)
    dbiases = [None] * len(params.biases)
    grad = dy
    last = len(params.weights) - 1
    for i in range(last, -1, -1):
        if not (i == last and params.final_linear):
            z = pre_acts[i]
            grad = grad * np.where(z > 0, 1.0, params.slope)
        dweights[i] = grad.T @ inputs[i]
        dbiases[i] = grad.sum(axis=0)
        grad = grad @ params.weights[i]
    return dweights, dbiases, grad


@dataclass
class AdamState:
    """First/second moment estimates plus the step counter."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls([np.zeros_like(p) for p in params],
                   [np.zeros_like(p) for p in params])


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState,
              lr: float, weight_decay: float = 0.0) -> None:
    """One in-place Adam update; L2 decay is folded into the gradient."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("parameter/gradient/state length mismatch")
    state.t += 1
    t = state.t
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError("parameter/gradient shape mismatch")
        if weight_decay:
            g = g + weight_decay * p
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


__all__ = [
    "DEFAULT_LEAKY_SLOPE",
    "leaky_relu",
    "mse",
    "MlpParams",
    "init_params",
    "mlp_forward",
    "mlp_backward",
    "AdamState",
    "adam_step",
]
