"""Stacked sparse-LSTM network with an affine output head, plus losses.

The stack unrolls over an input window and predicts the single next value:
regression emits a scalar, classification a softmax distribution.  Only the
top layer's hidden state at the final timestep feeds the head.
"""

from dataclasses import dataclass, field

import numpy as np

from .cell import (LstmLayerParams, cell_backward, cell_forward, init_layer,
                   zero_state, DEFAULT_KERNEL_THRESHOLD)
from .errors import ShapeError


@dataclass
class StackedRclstm:
    """Ordered layers (layer k feeds layer k+1) and a dense output head."""

    layers: list[LstmLayerParams]
    head_w: np.ndarray
    head_b: np.ndarray
    task: str  # "regression" | "classification"

    @property
    def feature_dim(self):
        return self.layers[0].input_dim

    @property
    def out_dim(self):
        return self.head_b.shape[0]

    def invalidate(self):
        for layer in self.layers:
            layer.invalidate()

    def apply_masks(self):
        for layer in self.layers:
            layer.apply_mask()


@dataclass
class Prediction:
    """Next-step output: scalar value or probability distribution."""

    value: float | None = None
    distribution: np.ndarray | None = None


@dataclass
class SequenceCache:
    """Per-timestep, per-layer forward caches retained for backprop."""

    steps: list  # steps[t][k] -> StepCache of layer k at timestep t
    top_h: np.ndarray
    head_out: np.ndarray
    layer_dims: list = field(default_factory=list)


def build_model(feature_dim, hidden_dims, task="regression", out_dim=None,
                density=1.0, mask_mode="probabilistic", seed=0,
                kernel_threshold=DEFAULT_KERNEL_THRESHOLD):
    """Construct a stacked model; all randomness derives from ``seed``."""
    if task not in ("regression", "classification"):
        raise ValueError(f"unknown task: {task!r}")
    if out_dim is None:
        out_dim = 1
    if task == "regression" and out_dim != 1:
        raise ValueError("regression uses a single output")
    seeds = np.random.SeedSequence(seed).generate_state(len(hidden_dims) + 1)
    layers = []
    dim = feature_dim
    for hidden, layer_seed in zip(hidden_dims, seeds[:-1]):
        layers.append(init_layer(dim, hidden, density=density, seed=int(layer_seed),
                                 mode=mask_mode, kernel_threshold=kernel_threshold))
        dim = hidden
    rng = np.random.default_rng(int(seeds[-1]))
    scale = 1.0 / np.sqrt(dim)
    head_w = rng.uniform(-scale, scale, size=(out_dim, dim))
    head_b = np.zeros(out_dim)
    return StackedRclstm(layers, head_w, head_b, task)


def _run_stack(model, window):
    """Shared unroll; ``window`` is (T, F) or batched (B, T, F)."""
    batched = window.ndim == 3
    n_steps = window.shape[1] if batched else window.shape[0]
    batch = window.shape[0] if batched else None
    states = [zero_state(layer.hidden_dim, batch) for layer in model.layers]
    steps = []
    for t in range(n_steps):
        inp = window[:, t, :] if batched else window[t]
        caches = []
        for k, layer in enumerate(model.layers):
            states[k], cache = cell_forward(layer, inp, states[k])
            inp = states[k].h
            caches.append(cache)
        steps.append(caches)
    top_h = states[-1].h
    head_out = top_h @ model.head_w.T + model.head_b
    return steps, top_h, head_out


def forward_sequence(model, window):
    """Run one window (T, F) through the stack; returns the prediction and
    the cache needed by ``backward_sequence``."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim == 1:
        window = window[:, None]
    if window.ndim != 2 or window.shape[0] < 1:
        raise ShapeError(f"window must be a non-empty (T, F) array, got {window.shape}")
    if window.shape[1] != model.feature_dim:
        raise ShapeError(
            f"feature dim {window.shape[1]} != model feature dim {model.feature_dim}")
    steps, top_h, head_out = _run_stack(model, window)
    if model.task == "regression":
        pred = Prediction(value=float(head_out[0]))
    else:
        pred = Prediction(distribution=softmax(head_out))
    cache = SequenceCache(steps, top_h, head_out,
                          [(l.input_dim, l.hidden_dim) for l in model.layers])
    return pred, cache


def forward_batch(model, windows):
    """Vectorized forward over (B, T, F); returns raw head outputs (B, out)
    and a batched cache."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[1] < 1:
        raise ShapeError(f"expected (B, T, F) windows, got {windows.shape}")
    if windows.shape[2] != model.feature_dim:
        raise ShapeError("feature dim mismatch")
    steps, top_h, head_out = _run_stack(model, windows)
    cache = SequenceCache(steps, top_h, head_out,
                          [(l.input_dim, l.hidden_dim) for l in model.layers])
    return head_out, cache


def backward_sequence(model, cache, loss_grad):
    """Backpropagation through time over the cached unroll.

    ``loss_grad`` is d(loss)/d(head output): shape (out,) for a single
    window or (B, out) for a batched cache (batch gradients are summed, so
    scale ``loss_grad`` by 1/B upstream for a mean loss).  Returns a flat
    dict: ``layer{k}.w``, ``layer{k}.b``, ``head.w``, ``head.b``.
    """
    dims = [(l.input_dim, l.hidden_dim) for l in model.layers]
    if cache.layer_dims != dims:
        raise ShapeError("cache does not match this model (stale cache)")
    loss_grad = np.asarray(loss_grad, dtype=np.float64)
    batched = cache.top_h.ndim == 2
    if batched:
        grad_head_w = loss_grad.T @ cache.top_h
        grad_head_b = loss_grad.sum(axis=0)
    else:
        grad_head_w = np.outer(loss_grad, cache.top_h)
        grad_head_b = loss_grad.copy()
    grads = {"head.w": grad_head_w, "head.b": grad_head_b}
    for k, layer in enumerate(model.layers):
        grads[f"layer{k}.w"] = np.zeros_like(layer.w)
        grads[f"layer{k}.b"] = np.zeros_like(layer.b)

    n_layers = len(model.layers)
    grad_h = [np.zeros_like(cache.steps[-1][k].h) for k in range(n_layers)]
    grad_c = [np.zeros_like(g) for g in grad_h]
    grad_h[-1] = grad_h[-1] + loss_grad @ model.head_w
    for t in range(len(cache.steps) - 1, -1, -1):
        carry = None  # gradient wrt the layer-(k+1) input at this timestep
        for k in range(n_layers - 1, -1, -1):
            gh = grad_h[k] if carry is None else grad_h[k] + carry
            cg = cell_backward(model.layers[k], cache.steps[t][k], gh, grad_c[k])
            grads[f"layer{k}.w"] += cg.grad_w
            grads[f"layer{k}.b"] += cg.grad_b
            grad_h[k] = cg.grad_h_prev
            grad_c[k] = cg.grad_c_prev
            carry = cg.grad_x
    return grads


def mse_loss(pred, target):
    """Squared error and its gradient wrt the prediction."""
    err = float(pred) - float(target)
    return err * err, 2.0 * err


def softmax(logits):
    """Stable softmax along the last axis."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(logits, target_class):
    """Negative log-likelihood of a 1-based target class.

    Returns (loss, gradient wrt logits); the gradient is
    ``softmax(logits) - one_hot(target)`` and sums to zero.
    """
    logits = np.asarray(logits, dtype=np.float64)
    m = logits.shape[0]
    if not 1 <= target_class <= m:
        raise IndexError(f"target class {target_class} outside 1..{m}")
    shifted = logits - logits.max()
    log_z = np.log(np.exp(shifted).sum())
    loss = log_z - shifted[target_class - 1]
    grad = softmax(logits)
    grad[target_class - 1] -= 1.0
    return float(loss), grad
