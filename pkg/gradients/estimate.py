import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.logger_service import LoggerService

logger = logging.getLogger(__name__)

K_TRACE_COLUMNS = ["step", "k_lr", "var_rp", "var_lr"]


@dataclass(frozen=True)
class KRecord:
    step: int
    k_lr: float
    var_rp: float
    var_lr: float


@dataclass
class GradEstimate:
    """Mittlerer Gradient über die Partikel und Varianz des Mittelwerts je Koordinate.

    contributions enthält die Beiträge der einzelnen Partikel (P x |theta|);
    chaotic markiert nicht-endliche Akkumulanten (Varianz dann unendlich).
    """
    mean: np.ndarray
    variance: np.ndarray
    tag: str
    contributions: np.ndarray
    k_trace: List[KRecord] = field(default_factory=list)
    chaotic: bool = False

    @classmethod
    def from_contributions(cls, contributions: np.ndarray, tag: str,
                           k_trace: Sequence[KRecord] = ()) -> "GradEstimate":
        contributions = np.asarray(contributions, dtype=float)
        n_particles = contributions.shape[0]
        with np.errstate(over="ignore", invalid="ignore"):
            finite = np.all(np.isfinite(contributions), axis=0)
            mean = np.where(finite, contributions.mean(axis=0), 0.0)
            if n_particles > 1:
                variance = contributions.var(axis=0, ddof=1) / n_particles
            else:
                variance = np.zeros(contributions.shape[1])
        variance = np.where(finite & np.isfinite(variance), variance, np.inf)
        chaotic = not bool(np.all(finite))
        if chaotic:
            LoggerService("Gradients").flag(
                "chaotic_gradient", f"{tag}: {int((~finite).sum())} Koordinaten mit nicht-endlichen Beiträgen",
                failure=True)
        return cls(mean=mean, variance=variance, tag=tag, contributions=contributions, k_trace=list(k_trace),
                   chaotic=chaotic)

    @property
    def n_particles(self) -> int:
        return int(self.contributions.shape[0])

    def trace_variance(self) -> float:
        return float(np.sum(self.variance))

    def standard_error(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def projected(self, direction: np.ndarray) -> Tuple[float, float]:
        """Gradient in Richtung direction und dessen Standardfehler."""
        with np.errstate(over="ignore", invalid="ignore"):
            values = self.contributions @ np.asarray(direction, dtype=float)
            if not np.all(np.isfinite(values)):
                return float(np.nan_to_num(values.mean(), nan=np.inf)), np.inf
            if values.size < 2:
                return float(values.mean()), 0.0
            return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))

    def masked(self, mask: Optional[np.ndarray]) -> "GradEstimate":
        """Eingefrorene Koordinaten (mask False) erhalten Gradient und Varianz 0."""
        if mask is None or np.all(mask):
            return self
        keep = np.asarray(mask, dtype=bool)
        return GradEstimate(mean=np.where(keep, self.mean, 0.0), variance=np.where(keep, self.variance, 0.0),
                            tag=self.tag, contributions=np.where(keep, self.contributions, 0.0),
                            k_trace=self.k_trace, chaotic=self.chaotic)

    def k_rows(self) -> List[List[float]]:
        return [[r.step, r.k_lr, r.var_rp, r.var_lr] for r in self.k_trace]
