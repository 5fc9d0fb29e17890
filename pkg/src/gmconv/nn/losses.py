"""Losses returning (value, gradient with respect to the predictions)."""

from gmconv._compat import StrEnum

import numpy as np

from gmconv.exceptions import ShapeError


class LossKind(StrEnum):
    MSE = "mse"
    CROSS_ENTROPY = "cross_entropy"


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean of squared differences over every entry."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ShapeError(f"prediction {pred.shape} and target {target.shape} differ")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy averaged over the batch; labels are class indices."""
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels, dtype=np.intp)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(
            f"need (batch, classes) logits and (batch,) labels, got {logits.shape}, {labels.shape}"
        )
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(len(labels))
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return float(-log_probs[rows, labels].mean()), grad / len(labels)


def compute_loss(kind: LossKind, pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if LossKind(kind) is LossKind.CROSS_ENTROPY:
        return cross_entropy_loss(pred, target)
    return mse_loss(pred, target)
