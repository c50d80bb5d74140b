from dataclasses import dataclass
from typing import Sequence

import numpy as np

from core.errors import ContractViolation


@dataclass(frozen=True)
class GaussianInitialState:
    """Diagonale Gauß-Verteilung p(x_0); Standard: hängender Stab, Streuung 0.1."""
    mean: Sequence[float] = (0.0, float(np.pi), 0.0, 0.0)
    std: Sequence[float] = (0.1, 0.1, 0.1, 0.1)

    def __post_init__(self):
        if len(self.mean) != len(self.std):
            raise ContractViolation("Mittelwert und Streuung des Anfangszustands haben verschiedene Längen")
        if any(s < 0 for s in self.std):
            raise ContractViolation("Streuung des Anfangszustands muss >= 0 sein")

    @property
    def dim(self) -> int:
        return len(self.mean)

    def sample(self, draws: np.ndarray) -> np.ndarray:
        """Transformiert Standardnormal-Ziehungen (..., D) in Anfangszustände."""
        return np.asarray(self.mean, dtype=float) + np.asarray(self.std, dtype=float) * np.asarray(draws)

    def sample_rng(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.sample(rng.standard_normal((count, self.dim)))
