"""Mini-batch training with early stopping on validation loss."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from gmconv.exceptions import ConfigError
from gmconv.nn.losses import LossKind, compute_loss
from gmconv.nn.network import Network, network_equivariance_error
from gmconv.nn.optim import SGD, AdamW, Optimizer, OptimizerKind
from gmconv.nn.tasks import SHUFFLE_STREAM, SyntheticDataset
from gmconv.telemetry import Recorder, get_recorder

METRIC_COLUMNS = ["epoch", "train_loss", "val_loss", "equivariance_error", "wall_ms"]


@dataclass(frozen=True)
class TrainConfig:
    """
    Attributes:
        optimizer: sgd or adam (AdamW with decoupled weight decay).
        learning_rate: Step size.
        beta1: Adam first-moment decay.
        beta2: Adam second-moment decay.
        eps: Adam denominator guard.
        weight_decay: Decay coefficient (0 keeps exact fits exact).
        batch_size: Mini-batch size; a value >= the sample count gives full-batch steps.
        max_epochs: Upper bound on epochs.
        patience: Epochs without strict validation improvement before stopping; 0 disables.
        seed: Seed for initialization and shuffling streams.
        equivariance_samples: Validation samples used for the per-epoch equivariance error.
    """

    optimizer: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 0.003
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    batch_size: int = 256
    max_epochs: int = 100
    patience: int = 6
    seed: int = 0
    equivariance_samples: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimizer", OptimizerKind(self.optimizer))
        if self.learning_rate <= 0 or self.eps <= 0:
            raise ConfigError("learning_rate and eps must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be non-negative")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise ConfigError("batch_size and max_epochs must be positive, patience non-negative")


def make_optimizer(config: TrainConfig) -> Optimizer:
    if config.optimizer is OptimizerKind.SGD:
        return SGD(config.learning_rate, config.weight_decay)
    return AdamW(config.learning_rate, config.beta1, config.beta2, config.eps, config.weight_decay)


@dataclass
class TrainResult:
    history: list[dict[str, Any]] = field(default_factory=list)
    best_val_loss: float = float("inf")
    epochs_run: int = 0
    stopped_early: bool = False


def evaluate(net: Network, x: np.ndarray, y: np.ndarray, loss: LossKind) -> float:
    value, _ = compute_loss(loss, net.predict(x), y)
    return value


def accuracy(net: Network, x: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.argmax(net.predict(x), axis=1) == labels))


def train(
    net: Network,
    data: SyntheticDataset,
    config: TrainConfig,
    loss: LossKind = LossKind.MSE,
    recorder: Recorder | None = None,
) -> TrainResult:
    """
    Train in place and restore the parameters with the best validation loss.

    Each epoch is logged through ``recorder.log_metrics`` with the columns of
    ``METRIC_COLUMNS``.
    """
    recorder = recorder or get_recorder()
    optimizer = make_optimizer(config)
    rng = np.random.default_rng([config.seed, SHUFFLE_STREAM])
    params = net.parameters()
    n = len(data.x_train)
    probe_samples = data.x_val[: config.equivariance_samples]

    result = TrainResult()
    best_params = net.flat_parameters()
    waited = 0
    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(n) if config.batch_size < n else np.arange(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, grad = compute_loss(loss, net.forward(data.x_train[idx]), data.y_train[idx])
            optimizer.step(params, net.backward(grad))

        row = {
            "epoch": epoch,
            "train_loss": evaluate(net, data.x_train, data.y_train, loss),
            "val_loss": evaluate(net, data.x_val, data.y_val, loss),
            "equivariance_error": network_equivariance_error(net, probe_samples),
            "wall_ms": (time.perf_counter() - started) * 1000.0,
        }
        result.history.append(row)
        result.epochs_run = epoch
        recorder.log_metrics(row)

        if row["val_loss"] < result.best_val_loss:
            result.best_val_loss = row["val_loss"]
            best_params = net.flat_parameters()
            waited = 0
        else:
            waited += 1
            if config.patience and waited >= config.patience:
                result.stopped_early = True
                break

    net.set_flat_parameters(best_params)
    return result
