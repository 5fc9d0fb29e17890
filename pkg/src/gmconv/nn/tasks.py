"""
Synthetic regression and classification tasks over a group.

All randomness comes from ``default_rng([seed, DATA_STREAM])``; parameter
initialization and shuffling use their own streams so that changing a model
never changes the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmconv._compat import StrEnum

import numpy as np

from gmconv.displacement import distance_to_gm
from gmconv.exceptions import ConfigError
from gmconv.group_spec import parse_group
from gmconv.groups import FiniteGroup, word_ball
from gmconv.matrices import densify, gm_from_coeffs

DATA_STREAM = 0
INIT_STREAM = 1
SHUFFLE_STREAM = 2


class TaskKind(StrEnum):
    EXACT = "exact_gconv_target"
    PERTURBED = "perturbed_gconv_target"
    INVARIANT = "invariant_classification"


@dataclass(frozen=True)
class SyntheticTask:
    """
    Attributes:
        kind: What the targets are.
        group: Group spec string.
        samples: Training samples.
        val_samples: Validation samples (early stopping).
        test_samples: Held-out samples for the final report.
        noise: Standard deviation of Gaussian target noise (regression kinds).
        sigma: Perturbation size relative to |T|_F (perturbed kind).
        rank: Rank of the perturbation (perturbed kind).
        k: Radius of the hidden kernel's support.
        num_classes: Number of classes (classification kind).
        seed: Data seed.
    """

    kind: TaskKind
    group: str
    samples: int = 256
    val_samples: int = 64
    test_samples: int = 256
    noise: float = 0.0
    sigma: float = 0.0
    rank: int = 1
    k: int = 1
    num_classes: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TaskKind(self.kind))
        if min(self.samples, self.val_samples, self.test_samples) < 1:
            raise ConfigError("sample counts must be positive")
        if self.noise < 0 or self.sigma < 0:
            raise ConfigError("noise and sigma must be non-negative")
        if self.rank < 1 or self.num_classes < 2:
            raise ConfigError("rank must be >= 1 and num_classes >= 2")


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    group: FiniteGroup
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    target_map: np.ndarray | None = None


def hidden_kernel(G: FiniteGroup, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random coefficients supported on the radius-k ball, scaled by 1/sqrt(N_k)."""
    support = word_ball(G, k)
    coeffs = np.zeros(G.order)
    coeffs[support] = rng.normal(size=len(support)) / np.sqrt(len(support))
    return coeffs


def perturbation(
    T: np.ndarray, G: FiniteGroup, sigma: float, rank: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Random matrix with its group-matrix projection removed, truncated to ``rank``
    by SVD and scaled to Frobenius norm sigma * |T|_F.
    """
    R = rng.normal(size=T.shape)
    R_perp = R - densify(distance_to_gm(R, G).projection)
    U, S, Vt = np.linalg.svd(R_perp)
    rank = min(rank, len(S))
    delta = (U[:, :rank] * S[:rank]) @ Vt[:rank]
    norm = float(np.linalg.norm(delta))
    if norm == 0.0:
        return delta
    return delta * (sigma * float(np.linalg.norm(T)) / norm)


def make_task(task: SyntheticTask, group: FiniteGroup | None = None) -> SyntheticDataset:
    """
    Draw the dataset for ``task``. Inputs have shape (samples, 1, |G|).

    Regression targets have shape (samples, 1, |G|); classification labels are class ids.
    """
    G = group or parse_group(task.group)
    rng = np.random.default_rng([task.seed, DATA_STREAM])
    T = densify(gm_from_coeffs(G, hidden_kernel(G, task.k, rng)))
    total = task.samples + task.val_samples + task.test_samples
    x = rng.normal(size=(total, 1, G.order))

    target_map = None
    if task.kind is TaskKind.INVARIANT:
        statistic = (x**3).sum(axis=(1, 2))
        train_stat = statistic[: task.samples]
        edges = np.quantile(train_stat, np.linspace(0, 1, task.num_classes + 1)[1:-1])
        y = np.digitize(statistic, edges).astype(np.intp)
    else:
        noise = rng.normal(size=x.shape)
        target_map = T
        if task.kind is TaskKind.PERTURBED:
            target_map = T + perturbation(T, G, task.sigma, task.rank, rng)
        y = x @ target_map.T + task.noise * noise

    a, b = task.samples, task.samples + task.val_samples
    return SyntheticDataset(G, x[:a], y[:a], x[a:b], y[a:b], x[b:], y[b:], target_map)
