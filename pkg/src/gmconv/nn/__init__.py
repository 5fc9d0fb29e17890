"""Small networks of group-matrix layers with explicit gradients, tasks and training."""

from gmconv.nn.blocks import Block, ConvBlock, PoolBlock, PReLUBlock, ReadoutBlock, StrideBlock
from gmconv.nn.losses import LossKind, compute_loss, cross_entropy_loss, mse_loss
from gmconv.nn.network import (
    LayerConfig,
    LayerType,
    Network,
    build_network,
    network_equivariance_error,
)
from gmconv.nn.optim import SGD, AdamW, Optimizer, OptimizerKind
from gmconv.nn.sweep import SweepRow, run_equivariance_sweep
from gmconv.nn.tasks import SyntheticDataset, SyntheticTask, TaskKind, make_task
from gmconv.nn.train import METRIC_COLUMNS, TrainConfig, TrainResult, accuracy, evaluate, train

__all__ = [
    "METRIC_COLUMNS",
    "SGD",
    "AdamW",
    "Block",
    "ConvBlock",
    "LayerConfig",
    "LayerType",
    "LossKind",
    "Network",
    "Optimizer",
    "OptimizerKind",
    "PReLUBlock",
    "PoolBlock",
    "ReadoutBlock",
    "StrideBlock",
    "SweepRow",
    "SyntheticDataset",
    "SyntheticTask",
    "TaskKind",
    "TrainConfig",
    "TrainResult",
    "accuracy",
    "build_network",
    "compute_loss",
    "cross_entropy_loss",
    "evaluate",
    "make_task",
    "mse_loss",
    "network_equivariance_error",
    "run_equivariance_sweep",
    "train",
]
