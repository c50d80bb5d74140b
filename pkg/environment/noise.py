from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from core.errors import ContractViolation

# Basis-Standardabweichungen: 0.01 m, 1 Grad, 0.1 m/s, 10 Grad/s
BASE_STDS: Tuple[float, ...] = (0.01, float(np.deg2rad(1.0)), 0.1, float(np.deg2rad(10.0)))


@dataclass(frozen=True)
class NoiseConfig:
    """Beobachtungsrauschen mit sigma^2 = k * sigma_base^2."""
    multiplier: float = 1.0
    base_stds: Tuple[float, ...] = field(default=BASE_STDS)

    def __post_init__(self):
        if self.multiplier < 0:
            raise ContractViolation(f"Rauschmultiplikator muss >= 0 sein, erhalten: {self.multiplier}")
        if any(s < 0 for s in self.base_stds):
            raise ContractViolation("Basis-Standardabweichungen müssen >= 0 sein")

    @property
    def stds(self) -> np.ndarray:
        return np.sqrt(self.multiplier) * np.asarray(self.base_stds, dtype=float)


def observe(state, noise: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if noise.multiplier == 0:
        return state.copy()
    return state + rng.standard_normal(state.shape) * noise.stds
