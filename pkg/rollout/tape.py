"""Vollständiges Rollout-Band: alles, was ein Gradientenschätzer für den Rückwärtspass braucht."""
import csv
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from rollout.config import RolloutConfig
from rollout.resample import ResampleRecord

logger = logging.getLogger(__name__)


@dataclass
class TrajectoryRecord:
    """Band eines Partikel-Rollouts mit Horizont T und P Partikeln.

    states[t] ist der Zustand vor einem eventuellen Resampling (auf ihm werden
    die Kosten ausgewertet), inputs[t] der Zustand, an dem Policy und Modell
    ausgewertet werden. Für Schritt t gilt states[t+1] = mu[t] + sigma[t] * eps[t].
    Lebende Partikel: alive[t, i]; abgeschnittene Partikel bleiben eingefroren.
    """
    config: RolloutConfig
    states: np.ndarray  # (T+1, P, D)
    inputs: np.ndarray  # (T, P, D)
    actions: np.ndarray  # (T, P, F)
    mu: np.ndarray  # (T, P, D)
    sigma: np.ndarray  # (T, P, D)
    eps: np.ndarray  # (T, P, D)
    costs: np.ndarray  # (T+1, P)
    cost_grads: np.ndarray  # (T+1, P, D)
    dmu_dx: np.ndarray  # (T, P, D, D)
    dmu_du: np.ndarray  # (T, P, D, F)
    dsigma_dx: np.ndarray  # (T, P, D, D)
    dsigma_du: np.ndarray  # (T, P, D, F)
    du_dx: np.ndarray  # (T, P, F, D)
    du_dtheta: np.ndarray  # (T, P, F, |theta|)
    alive: np.ndarray  # (T+1, P)
    particle_ids: np.ndarray
    resamples: List[Optional[ResampleRecord]] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return int(self.actions.shape[0])

    @property
    def n_particles(self) -> int:
        return int(self.states.shape[1])

    @property
    def state_dim(self) -> int:
        return int(self.states.shape[2])

    @property
    def action_dim(self) -> int:
        return int(self.actions.shape[2])

    @property
    def n_params(self) -> int:
        return int(self.du_dtheta.shape[3])

    @property
    def has_resampling(self) -> bool:
        return any(r is not None for r in self.resamples)

    def returns_to_go(self) -> np.ndarray:
        """G[t, i] = sum_{tau >= t} c[tau, i], Form (T+1, P)."""
        return np.cumsum(self.costs[::-1], axis=0)[::-1]

    def particle_returns(self) -> np.ndarray:
        return self.returns_to_go()[0]

    def mean_return(self) -> float:
        return float(np.mean(self.particle_returns()))

    def return_standard_error(self) -> float:
        returns = self.particle_returns()
        if returns.size < 2:
            return 0.0
        return float(np.std(returns, ddof=1) / np.sqrt(returns.size))

    def csv_header(self) -> List[str]:
        d, f = self.state_dim, self.action_dim
        return (["t", "i"] + [f"x{k}" for k in range(d)] + [f"u{k}" for k in range(f)]
                + [f"mu{k}" for k in range(d)] + [f"sigma{k}" for k in range(d)]
                + [f"eps{k}" for k in range(d)] + ["cost"])

    def to_csv_rows(self) -> List[List[object]]:
        rows = []
        blank_step = [""] * (self.action_dim + 3 * self.state_dim)
        for t in range(self.horizon + 1):
            for i in range(self.n_particles):
                row: List[object] = [t, int(self.particle_ids[i])] + self.states[t, i].tolist()
                if t < self.horizon:
                    row += (self.actions[t, i].tolist() + self.mu[t, i].tolist() + self.sigma[t, i].tolist()
                            + self.eps[t, i].tolist())
                else:
                    row += blank_step
                rows.append(row + [float(self.costs[t, i])])
        return rows

    def dump_csv(self, file_path: str) -> None:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(self.csv_header())
            writer.writerows(self.to_csv_rows())
        logger.debug(f"Band geschrieben: {file_path}")
