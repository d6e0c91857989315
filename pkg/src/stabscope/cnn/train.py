"""Adam optimizer and the training loop.

Training is deterministic given the seed: parameter init, the shuffle order,
and every dropout mask derive from fixed sub-streams, so two runs with equal
seeds produce bit-identical parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .layers import bce_loss, sigmoid
from .model import Model, ModelConfig


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 20
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    validation_fraction: float = 0.1

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.epochs, self.adam_eps) <= 0:
            raise ValueError("learning rate, batch size, epochs and eps must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation fraction must be in (0, 1)")


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(model: Model, state: AdamState, lr: float) -> None:
    """One bias-corrected Adam update over every model parameter."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    for name, layer, key in model.named_params():
        g = layer.grads.get(key)
        if g is None:
            raise TrainingError(f"missing gradient for {name}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in {name}")
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        state.m[name] = b1 * state.m[name] + (1 - b1) * g
        state.v[name] = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = state.m[name] / (1 - b1**state.t)
        v_hat = state.v[name] / (1 - b2**state.t)
        layer.params[key] = layer.params[key] - lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float


def _stratified_split(labels: np.ndarray, fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    train_idx, val_idx = [], []
    for lab in np.unique(labels):
        idx = np.nonzero(labels == lab)[0]
        idx = idx[rng.permutation(len(idx))]
        n_val = max(1, int(round(fraction * len(idx))))
        if n_val >= len(idx):
            raise TrainingError("validation split leaves no training data for a label")
        val_idx.append(idx[:n_val])
        train_idx.append(idx[n_val:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def _evaluate(model: Model, data, indices, batch_size: int, l2: float) -> tuple[float, float]:
    losses, hits, count = 0.0, 0, 0
    for start in range(0, len(indices), batch_size):
        idx = indices[start : start + batch_size]
        x, y = data.batch(idx)
        p = sigmoid(model.forward(x, train=False))
        losses += bce_loss(p, y) * len(idx)
        hits += int(np.sum((p > 0.5) == (y > 0.5)))
        count += len(idx)
    loss = losses / count + (l2 * float(sum(np.sum(w * w) for w in model.weight_params())))
    return loss, hits / count


def train(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    data,
    verbose: bool = False,
) -> tuple[Model, list[EpochMetrics]]:
    """Fit a classifier on a dataset view.

    ``data`` must expose ``labels`` (int array), ``spatial_shape`` and
    ``batch(indices) -> (inputs, labels)``.  Returns the trained model and
    the per-epoch metric history.
    """
    labels = np.asarray(data.labels)
    if len(np.unique(labels)) < 2:
        raise TrainingError("training data must contain both classes")

    split_rng = np.random.default_rng([train_cfg.seed, 0x5917])
    shuffle_rng = np.random.default_rng([train_cfg.seed, 0x51C0FF])
    dropout_rng = np.random.default_rng([train_cfg.seed, 0xD20])
    train_idx, val_idx = _stratified_split(labels, train_cfg.validation_fraction, split_rng)

    model = Model(model_cfg, data.spatial_shape, seed=train_cfg.seed)
    adam = AdamState(train_cfg.adam_beta1, train_cfg.adam_beta2, train_cfg.adam_eps)
    l2 = model_cfg.l2_coeff
    history: list[EpochMetrics] = []

    for epoch in range(train_cfg.epochs):
        order = train_idx[shuffle_rng.permutation(len(train_idx))]
        ep_loss, ep_hits, seen = 0.0, 0, 0
        for start in range(0, len(order), train_cfg.batch_size):
            idx = order[start : start + train_cfg.batch_size]
            x, y = data.batch(idx)
            logits = model.forward(x, train=True, rng=dropout_rng)
            p = sigmoid(logits)
            loss = bce_loss(p, y, model.weight_params(), l2)
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            model.backward((p - y) / len(idx))
            model.add_l2_grads(l2)
            adam_step(model, adam, train_cfg.learning_rate)
            ep_loss += loss * len(idx)
            ep_hits += int(np.sum((p > 0.5) == (y > 0.5)))
            seen += len(idx)
        val_loss, val_acc = _evaluate(model, data, val_idx, train_cfg.batch_size, l2)
        metrics = EpochMetrics(epoch, ep_loss / seen, ep_hits / seen, val_loss, val_acc)
        history.append(metrics)
        if verbose:
            print(
                f"epoch {epoch:3d}  train loss {metrics.train_loss:.4f} "
                f"acc {metrics.train_acc:.3f}  val loss {metrics.val_loss:.4f} "
                f"acc {metrics.val_acc:.3f}",
                flush=True,
            )
    return model, history


def predict(model: Model, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Class-1 probabilities for a stack of inputs."""
    out = []
    for start in range(0, len(x), batch_size):
        out.append(sigmoid(model.forward(x[start : start + batch_size], train=False)))
    return np.concatenate(out) if out else np.empty(0)
