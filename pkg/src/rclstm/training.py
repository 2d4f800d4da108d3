"""Mini-batch gradient training with mask-respecting updates.

Each optimizer step re-applies every layer's connectivity mask, so masked
weights stay exactly zero for the whole run.  All randomness (shuffling)
comes from the config seed; identical (seed, data, config) reproduce the
trained model bit for bit.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .metrics import accuracy, rmse
from .network import backward_sequence, forward_batch, softmax


@dataclass
class TrainingConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    grad_clip: float = 5.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.learning_rate <= 0 or self.grad_clip <= 0:
            raise ValueError("learning_rate and grad_clip must be positive")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer: {self.optimizer!r}")


@dataclass
class TrainingHistory:
    train_loss: list = field(default_factory=list)
    val_metric: list = field(default_factory=list)
    epoch_seconds: list = field(default_factory=list)


@dataclass
class OptimizerState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def model_params(model):
    """Live references to every trainable array, keyed like the grad dict."""
    params = {"head.w": model.head_w, "head.b": model.head_b}
    for k, layer in enumerate(model.layers):
        params[f"layer{k}.w"] = layer.w
        params[f"layer{k}.b"] = layer.b
    return params


def model_masks(model):
    return {f"layer{k}.w": layer.mask.bits for k, layer in enumerate(model.layers)}


def clip_gradients(grads, max_norm):
    """Scale all gradients in place so the global L2 norm is <= max_norm."""
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return grads


def optimizer_step(params, grads, state, config, masks=None):
    """Apply one SGD or Adam update in place, then re-apply the masks."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient in {name}")
    state.step += 1
    lr = config.learning_rate
    if config.optimizer == "sgd":
        for name, p in params.items():
            p -= lr * grads[name]
    else:
        b1, b2, eps = config.beta1, config.beta2, config.epsilon
        t = state.step
        for name, p in params.items():
            g = grads[name]
            if name not in state.m:
                state.m[name] = np.zeros_like(p)
                state.v[name] = np.zeros_like(p)
            state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
            state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
            m_hat = state.m[name] / (1.0 - b1 ** t)
            v_hat = state.v[name] / (1.0 - b2 ** t)
            p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    if masks:
        for name, bits in masks.items():
            params[name][~bits] = 0.0
    return params, state


def _batch_loss_and_grad(model, outputs, targets):
    """Mean loss over the batch and d(loss)/d(head outputs), (B, out)."""
    n = outputs.shape[0]
    if model.task == "regression":
        err = outputs[:, 0] - targets
        with np.errstate(over="ignore"):  # inf loss is caught as divergence
            loss = float(np.mean(err * err))
        dout = (2.0 * err / n)[:, None]
    else:
        probs = softmax(outputs)
        idx = targets.astype(int) - 1  # targets are 1-based classes
        picked = np.clip(probs[np.arange(n), idx], 1e-300, None)
        loss = float(np.mean(-np.log(picked)))
        dout = probs
        dout[np.arange(n), idx] -= 1.0
        dout /= n
    return loss, dout


def evaluate_model(model, dataset, batch_size=256):
    """Test-set metric on the dataset's own scale: RMSE for regression,
    classification accuracy otherwise.  Returns (metric, predictions)."""
    preds = predict_batch(model, dataset.inputs, batch_size=batch_size)
    if model.task == "regression":
        return rmse(dataset.targets, preds), preds
    return accuracy(dataset.targets, preds), preds


def predict_batch(model, windows, batch_size=256):
    """Model predictions for stacked windows: values (regression) or
    1-based argmax classes (classification)."""
    out = []
    for lo in range(0, windows.shape[0], batch_size):
        chunk = windows[lo : lo + batch_size]
        head_out, _ = forward_batch(model, chunk)
        if model.task == "regression":
            out.append(head_out[:, 0])
        else:
            out.append(np.argmax(head_out, axis=1) + 1)
    return np.concatenate(out) if out else np.array([])


def fit(model, train_ds, config, val_ds=None):
    """Train ``model`` on a WindowedDataset with full-window BPTT.

    Returns (model, TrainingHistory).  Raises DivergenceError (carrying the
    epoch) on a non-finite loss or gradient.
    """
    if train_ds.inputs.shape[0] == 0:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.seed)
    params = model_params(model)
    masks = model_masks(model)
    state = OptimizerState()
    history = TrainingHistory()
    n = train_ds.inputs.shape[0]
    for epoch in range(config.epochs):
        started = time.perf_counter()
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        losses = []
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            outputs, cache = forward_batch(model, train_ds.inputs[idx])
            loss, dout = _batch_loss_and_grad(model, outputs, train_ds.targets[idx])
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
            grads = backward_sequence(model, cache, dout)
            clip_gradients(grads, config.grad_clip)
            try:
                optimizer_step(params, grads, state, config, masks)
            except DivergenceError as err:
                raise DivergenceError(f"{err} at epoch {epoch}", epoch=epoch) from None
            model.invalidate()
            losses.append(loss)
        history.train_loss.append(float(np.mean(losses)))
        if val_ds is not None:
            metric, _ = evaluate_model(model, val_ds)
            history.val_metric.append(metric)
        history.epoch_seconds.append(time.perf_counter() - started)
    return model, history
