"""Varianzschätzer für die inverse Varianzgewichtung der Total Propagation."""
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError

VARIANCE_STRATEGIES = ("sample", "moving_average", "subset")


def _trace_of_mean_variance(values: np.ndarray) -> float:
    if values.shape[0] < 2:
        return 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.sum(values.var(axis=0, ddof=1)) / values.shape[0])


class SampleVariance:
    """Spur der Stichprobenvarianz über die Partikel, geteilt durch P."""
    name = "sample"

    def traces(self, step: int, theta_rp: np.ndarray, theta_lr: np.ndarray) -> Tuple[float, float]:
        return _trace_of_mean_variance(theta_rp), _trace_of_mean_variance(theta_lr)


class MovingAverageVariance(SampleVariance):
    """Exponentiell geglättete Spuren je Zeitschritt über aufeinanderfolgende Aufrufe."""
    name = "moving_average"

    def __init__(self, decay: float = 0.9):
        if not 0.0 <= decay < 1.0:
            raise ConfigError(f"decay muss in [0, 1) liegen, erhalten: {decay}")
        self.decay = decay
        self._averages: Dict[int, Tuple[float, float]] = {}

    def traces(self, step, theta_rp, theta_lr):
        current = super().traces(step, theta_rp, theta_lr)
        previous = self._averages.get(step)
        if previous is None or not all(np.isfinite(previous)):
            averaged = current
        else:
            averaged = tuple(self.decay * p + (1.0 - self.decay) * c for p, c in zip(previous, current))
        self._averages[step] = averaged
        return averaged


class SubsetVariance(SampleVariance):
    """Spuren nur über ausgewählte Parameterkoordinaten."""
    name = "subset"

    def __init__(self, indices: Sequence[int]):
        if len(indices) == 0:
            raise ConfigError("subset-Strategie benötigt mindestens einen Index")
        self.indices = np.asarray(indices, dtype=int)

    def traces(self, step, theta_rp, theta_lr):
        return super().traces(step, theta_rp[:, self.indices], theta_lr[:, self.indices])


def make_strategy(name: str = "sample", decay: float = 0.9,
                  subset: Optional[Sequence[int]] = None) -> SampleVariance:
    if name == "sample":
        return SampleVariance()
    if name == "moving_average":
        return MovingAverageVariance(decay)
    if name == "subset":
        return SubsetVariance(subset or ())
    raise ConfigError(f"Unbekannte Varianzstrategie '{name}', erlaubt: {VARIANCE_STRATEGIES}")
