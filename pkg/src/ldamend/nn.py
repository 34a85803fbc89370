"""Minimal dense-network substrate with hand-written backprop.

Everything here is plain numpy: dense layers, two-to-three layer MLPs,
stable softmax / cross-entropy, SGD and Adam steps, and a central
finite-difference oracle used by the test suite to certify every
analytic gradient in the package.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("identity", "relu", "tanh")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "identity":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name: str, z: np.ndarray) -> np.ndarray:
    # derivative w.r.t. the pre-activation z
    if name == "identity":
        return np.ones_like(z)
    if name == "relu":
        return np.where(z > 0.0, 1.0, 0.0)
    if name == "tanh":
        return 1.0 - np.tanh(z) ** 2
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class DenseLayer:
    """Affine map plus pointwise activation: ``act(weights @ x + bias)``."""

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = "identity"

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ValueError("weights must be 2-d and bias 1-d")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ValueError(
                f"bias length {self.bias.shape[0]} does not match "
                f"{self.weights.shape[0]} output rows"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class MlpNetwork:
    """A chain of :class:`DenseLayer`; dimensions must link up."""

    layers: list[DenseLayer]

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError(
                    f"layer output {prev.out_dim} feeds layer input {nxt.in_dim}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Live references, ordered W0, b0, W1, b1, ... (optimizers mutate them)."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.append(layer.weights)
            params.append(layer.bias)
        return params


@dataclass
class ForwardTrace:
    """Per-layer inputs and pre-activations recorded by a forward pass."""

    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]

    def matches(self, net: MlpNetwork) -> bool:
        if len(self.inputs) != len(net.layers):
            return False
        return all(
            x.shape[-1] == layer.in_dim and z.shape[-1] == layer.out_dim
            for x, z, layer in zip(self.inputs, self.pre_activations, net.layers)
        )


def init_dense(
    in_dim: int, out_dim: int, activation: str, rng: np.random.Generator
) -> DenseLayer:
    """Glorot-uniform weights, zero bias, reproducible from the generator."""
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    weights = rng.uniform(-limit, limit, size=(out_dim, in_dim))
    return DenseLayer(weights=weights, bias=np.zeros(out_dim), activation=activation)


def build_mlp(
    dims: Sequence[int],
    activations: Sequence[str],
    rng: np.random.Generator,
) -> MlpNetwork:
    """Build an MLP with layer sizes ``dims[0] -> dims[1] -> ... -> dims[-1]``."""
    if len(activations) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    layers = [
        init_dense(dims[i], dims[i + 1], activations[i], rng)
        for i in range(len(dims) - 1)
    ]
    return MlpNetwork(layers=layers)


def mlp_forward_batch(net: MlpNetwork, x: np.ndarray) -> tuple[np.ndarray, ForwardTrace]:
    """Forward pass over a batch of rows; the trace feeds the backward pass."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.in_dim:
        raise ValueError(f"input width {x.shape[-1]} != network in_dim {net.in_dim}")
    inputs: list[np.ndarray] = []
    pre_acts: list[np.ndarray] = []
    for layer in net.layers:
        inputs.append(x)
        z = x @ layer.weights.T + layer.bias
        pre_acts.append(z)
        x = _act(layer.activation, z)
    return x, ForwardTrace(inputs=inputs, pre_activations=pre_acts)


def mlp_forward(net: MlpNetwork, x: np.ndarray) -> tuple[np.ndarray, ForwardTrace]:
    """Single-sample forward pass: returns ``(y, trace)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("mlp_forward expects a vector; use mlp_forward_batch")
    if not np.isfinite(x).all():
        raise ValueError("input must be finite")
    return mlp_forward_batch(net, x)


def mlp_backward_batch(
    net: MlpNetwork, trace: ForwardTrace, dl_dy: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Backprop a batch of output gradients through the traced forward pass.

    Returns ``(dl_dx, grads)`` where ``grads`` is ordered like
    :meth:`MlpNetwork.parameters` and summed over the batch rows.
    """
    if not trace.matches(net):
        raise ValueError("trace does not match network (stale or mismatched cache)")
    dl_dy = np.asarray(dl_dy, dtype=float)
    if dl_dy.shape != trace.pre_activations[-1].shape:
        raise ValueError("output gradient shape does not match trace")
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(net.layers))
    delta = dl_dy
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        dz = delta * _act_grad(layer.activation, trace.pre_activations[k])
        x = trace.inputs[k]
        if dz.ndim == 1:
            grads[2 * k] = np.outer(dz, x)
            grads[2 * k + 1] = dz.copy()
        else:
            grads[2 * k] = dz.T @ x
            grads[2 * k + 1] = dz.sum(axis=0)
        delta = dz @ layer.weights
    return delta, grads


def mlp_backward(
    net: MlpNetwork, trace: ForwardTrace, dl_dy: np.ndarray
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Single-sample backward pass matching :func:`mlp_forward`."""
    dl_dy = np.asarray(dl_dy, dtype=float)
    if dl_dy.ndim != 1:
        raise ValueError("mlp_backward expects a vector gradient")
    return mlp_backward_batch(net, trace, dl_dy)


def finite_difference_grad(
    loss_fn: Callable[[list[np.ndarray]], float],
    params: list[np.ndarray],
    h: float = 1e-5,
) -> list[np.ndarray]:
    """Central-difference gradient estimate of ``loss_fn`` at ``params``.

    ``loss_fn`` must be deterministic; each parameter entry is perturbed by
    ``+/- h`` in turn, so keep the total parameter count small (this is a
    verification oracle, not a training tool).
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    work = [np.array(p, dtype=float, copy=True) for p in params]
    grads = [np.zeros_like(p) for p in work]
    for p, g in zip(work, grads):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            up = loss_fn(work)
            flat_p[i] = orig - h
            down = loss_fn(work)
            flat_p[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise ValueError("loss_fn returned a non-finite value")
            flat_g[i] = (up - down) / (2.0 * h)
    return grads


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, in [-1, 1]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm input")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def cosine_similarity_grad(a: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Cosine similarity plus its gradient with respect to ``a``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm input")
    cos = float(a @ b / (na * nb))
    grad = b / (na * nb) - cos * a / (na * na)
    return cos, grad


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def check_simplex(q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Validate that ``q`` lies on the probability simplex (within ``tol``)."""
    q = np.asarray(q, dtype=float)
    if (q < -tol).any() or abs(float(q.sum()) - 1.0) > tol:
        raise ValueError("target is not a probability distribution")
    return q


def cross_entropy(q: np.ndarray, z: np.ndarray) -> tuple[float, np.ndarray]:
    """Cross entropy of logits ``z`` against a simplex target ``q``.

    Returns ``(loss, dloss/dz)`` with the textbook gradient softmax(z) - q.
    """
    q = check_simplex(q)
    z = np.asarray(z, dtype=float)
    if q.shape != z.shape:
        raise ValueError("target and logits must have the same length")
    loss = float(-(q * log_softmax(z)).sum())
    return loss, softmax(z) - q


@dataclass
class OptimizerState:
    """SGD or Adam state; moment buffers are allocated on first use."""

    kind: str
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def optimizer_step(
    state: OptimizerState, params: list[np.ndarray], grads: list[np.ndarray]
) -> list[np.ndarray]:
    """Apply one update in place; returns ``params`` for convenience."""
    if len(params) != len(grads):
        raise ValueError("params and grads must align")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
    if state.kind == "sgd":
        for p, g in zip(params, grads):
            p -= state.learning_rate * g
        return params
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1**t
    bias2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
    return params
