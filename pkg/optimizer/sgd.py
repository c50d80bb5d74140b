"""Varianz-normierter SGD mit Momentum.

    m <- gamma m + g / sqrt(g^2 + v + delta);  theta <- theta - alpha m

g ist der Mittelwert der Partikel-Gradienten, v die Varianz dieses
Mittelwerts (Stichprobenvarianz / P), beides je Koordinate.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from core.errors import ConfigError, ContractViolation
from gradients.estimate import GradEstimate

logger = logging.getLogger(__name__)

OPTLOG_COLUMNS = ["step", "grad_norm", "mean_variance", "momentum_norm"]


@dataclass(frozen=True)
class OptState:
    momentum: np.ndarray
    learning_rate: float = 5e-4
    momentum_coeff: float = 0.9
    delta: float = 1e-12
    step: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"Lernrate muss positiv sein, erhalten: {self.learning_rate}")
        if not 0.0 <= self.momentum_coeff < 1.0:
            raise ConfigError(f"Momentum muss in [0, 1) liegen, erhalten: {self.momentum_coeff}")
        if not self.delta > 0:
            raise ConfigError(f"delta muss positiv sein, erhalten: {self.delta}")

    @classmethod
    def initial(cls, n_params: int, learning_rate: float = 5e-4, momentum_coeff: float = 0.9,
                delta: float = 1e-12) -> "OptState":
        return cls(np.zeros(n_params), learning_rate, momentum_coeff, delta)


@dataclass
class OptimizerLog:
    rows: List[List[float]] = field(default_factory=list)

    def record(self, state: OptState, est: GradEstimate) -> None:
        finite_var = est.variance[np.isfinite(est.variance)]
        mean_var = float(finite_var.mean()) if finite_var.size == est.variance.size else float("inf")
        self.rows.append([state.step, float(np.linalg.norm(est.mean)), mean_var,
                          float(np.linalg.norm(state.momentum))])


def normalized_increment(mean: np.ndarray, variance: np.ndarray, delta: float) -> np.ndarray:
    """g / sqrt(g^2 + v + delta); nicht-endliche Koordinaten liefern 0."""
    with np.errstate(over="ignore", invalid="ignore"):
        increment = mean / np.sqrt(mean ** 2 + variance + delta)
    return np.where(np.isfinite(increment), increment, 0.0)


def sgd_step(opt: OptState, theta: np.ndarray, est: GradEstimate,
             mask: Optional[np.ndarray] = None) -> Tuple[OptState, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    if est.mean.shape != theta.shape:
        raise ContractViolation(f"Gradient der Form {est.mean.shape} passt nicht zu theta {theta.shape}")
    increment = normalized_increment(est.mean, est.variance, opt.delta)
    if mask is not None:
        increment = np.where(mask, increment, 0.0)
    momentum = opt.momentum_coeff * opt.momentum + increment
    new_state = replace(opt, momentum=momentum, step=opt.step + 1)
    return new_state, theta - opt.learning_rate * momentum
