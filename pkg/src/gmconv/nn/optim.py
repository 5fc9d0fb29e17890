"""In-place optimizers over a name -> array parameter registry."""

from __future__ import annotations

from abc import ABC, abstractmethod
from gmconv._compat import StrEnum

import numpy as np


class OptimizerKind(StrEnum):
    SGD = "sgd"
    ADAM = "adam"


class Optimizer(ABC):
    def __init__(self, learning_rate: float, weight_decay: float = 0.0):
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay

    @abstractmethod
    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """Update ``params`` in place; names without a gradient are left alone."""


class SGD(Optimizer):
    """Plain gradient descent with L2 weight decay added to the gradient."""

    def step(self, params, grads):
        for name, grad in grads.items():
            param = params[name]
            param -= self.learning_rate * (grad + self.weight_decay * param)


class AdamW(Optimizer):
    """Adam with decoupled weight decay."""

    def __init__(
        self,
        learning_rate: float = 0.003,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        super().__init__(learning_rate, weight_decay)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params, grads):
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        for name, grad in grads.items():
            param = params[name]
            m = self._m.setdefault(name, np.zeros_like(param))
            v = self._v.setdefault(name, np.zeros_like(param))
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad**2
            update = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            param -= self.learning_rate * (update + self.weight_decay * param)
