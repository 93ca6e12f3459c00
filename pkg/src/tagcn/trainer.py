"""Adam optimization, early stopping, and the train/validate/test protocol."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .errors import EmptyListError, ShapeMismatchError
from .graph import ShiftKind, normalize
from .nn import Model, TagcnLayer, accuracy, masked_softmax_xent

# parameter blocks subject to L2 decay (first layer only, weights not bias)
_DECAYED = {"coeffs", "weight", "theta"}


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_epochs: int = 300
    early_stop_window: int = 45
    dropout_rate: float = 0.5
    weight_decay: float = 5e-4
    hidden_units: int = 16
    filter_size: int = 2
    num_layers: int = 2
    seed: int = 0
    num_runs: int = 10

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ShapeMismatchError("learning_rate must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ShapeMismatchError("dropout_rate must be in [0, 1)")
        if self.early_stop_window < 1:
            raise ShapeMismatchError("early_stop_window must be >= 1")


@dataclass
class RunMetrics:
    train_losses: List[float] = field(default_factory=list)
    val_losses: List[float] = field(default_factory=list)
    val_accuracies: List[float] = field(default_factory=list)
    test_accuracy: float = 0.0
    epochs_run: int = 0
    wall_time: float = 0.0
    seed: int = 0


class AdamState:
    """First/second moment buffers for a collection of parameter blocks."""

    def __init__(self, params: dict):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}


def adam_step(params: dict, grads: dict, state: AdamState, t: int,
              cfg: TrainConfig) -> None:
    """In-place bias-corrected Adam update; t counts from 1."""
    if t < 1:
        raise ShapeMismatchError("Adam step index must be >= 1")
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ShapeMismatchError(f"gradient shape mismatch for {key}")
        state.m[key] = b1 * state.m[key] + (1 - b1) * g
        state.v[key] = b2 * state.v[key] + (1 - b2) * g * g
        m_hat = state.m[key] / (1 - b1 ** t)
        v_hat = state.v[key] / (1 - b2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)


def early_stop_check(history: Sequence[float], window: int) -> bool:
    """True when the latest loss exceeds the mean of the previous `window` losses."""
    if window < 1:
        raise ShapeMismatchError("window must be >= 1")
    if len(history) <= window:
        return False
    return history[-1] > float(np.mean(history[-window - 1:-1]))


def build_model(dataset, cfg: TrainConfig, rng: np.random.Generator) -> Model:
    """Stack of polynomial-filter layers; the last maps straight to class logits."""
    if cfg.num_layers < 1:
        raise ShapeMismatchError("num_layers must be >= 1")
    s = normalize(dataset.graph, ShiftKind.SYM_NORMALIZED)
    widths = [dataset.features.shape[1]]
    widths += [cfg.hidden_units] * (cfg.num_layers - 1)
    widths += [dataset.num_classes]
    layers = [
        TagcnLayer(s, widths[i], widths[i + 1], cfg.filter_size, rng)
        for i in range(cfg.num_layers)
    ]
    return Model(layers, dropout_rate=cfg.dropout_rate)


def _collect(model: Model, which: str) -> dict:
    src = model.gradients if which == "grads" else model.parameters
    return {(i, name): arr for i, name, arr in src()}


def train_model(dataset, cfg: TrainConfig):
    """Train on the train mask, early-stop on validation loss, test once.

    The parameters scoring the best validation accuracy are restored before
    the test evaluation.  Fully deterministic given (dataset, cfg).
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    model = build_model(dataset, cfg, rng)
    params = _collect(model, "params")
    state = AdamState(params)
    X, labels = dataset.features, dataset.labels
    metrics = RunMetrics(seed=cfg.seed)

    best_val_acc = -1.0
    best_params = None
    for epoch in range(1, cfg.max_epochs + 1):
        logits = model.forward(X, mode="train", rng=rng)
        loss, grad = masked_softmax_xent(logits, labels, dataset.train_idx)
        model.backward(grad)
        grads = _collect(model, "grads")
        if cfg.weight_decay > 0.0:
            for (i, name), g in grads.items():
                if i == 0 and name in _DECAYED:
                    g += cfg.weight_decay * params[(i, name)]
                    loss += 0.5 * cfg.weight_decay * float(
                        np.sum(params[(i, name)] ** 2)
                    )
        adam_step(params, grads, state, epoch, cfg)

        eval_logits = model.forward(X, mode="eval")
        val_loss, _ = masked_softmax_xent(eval_logits, labels, dataset.val_idx)
        val_acc = accuracy(eval_logits, labels, dataset.val_idx)
        metrics.train_losses.append(loss)
        metrics.val_losses.append(val_loss)
        metrics.val_accuracies.append(val_acc)
        metrics.epochs_run = epoch
        if val_acc > best_val_acc:
            best_val_acc = val_acc
            best_params = {k: v.copy() for k, v in params.items()}
        if early_stop_check(metrics.val_losses, cfg.early_stop_window):
            break

    if best_params is not None:
        for (i, name), arr in best_params.items():
            model.layers[i].params[name] = arr
    test_logits = model.forward(X, mode="eval")
    metrics.test_accuracy = accuracy(test_logits, labels, dataset.test_idx)
    metrics.wall_time = time.perf_counter() - t0
    return model, metrics


def train_multi(dataset, cfg: TrainConfig, num_runs: int | None = None):
    """Independent seeded runs cfg.seed, cfg.seed+1, ..."""
    runs = cfg.num_runs if num_runs is None else num_runs
    results = []
    for i in range(runs):
        run_cfg = dataclasses.replace(cfg, seed=cfg.seed + i)
        results.append(train_model(dataset, run_cfg)[1])
    return results


def aggregate_runs(metrics: Sequence[RunMetrics]) -> dict:
    """Sample mean and sample standard deviation of test accuracy."""
    if len(metrics) == 0:
        raise EmptyListError("no runs to aggregate")
    accs = np.array([m.test_accuracy for m in metrics])
    std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
    return {"mean_accuracy": float(np.mean(accs)), "std_accuracy": std,
            "num_runs": len(metrics)}
