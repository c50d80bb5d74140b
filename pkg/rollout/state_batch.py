from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import ContractViolation


@dataclass
class StateBatch:
    """P Partikel mit je D Zustandsdimensionen; particle_ids adressieren die Zufallsströme."""
    states: np.ndarray
    particle_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.particle_ids is None:
            self.particle_ids = np.arange(self.states.shape[0])
        self.particle_ids = np.asarray(self.particle_ids, dtype=np.int64)
        if self.particle_ids.shape != (self.states.shape[0],):
            raise ContractViolation("Eine Partikel-ID pro Zustand erforderlich")

    @property
    def n_particles(self) -> int:
        return int(self.states.shape[0])

    @property
    def state_dim(self) -> int:
        return int(self.states.shape[1])

    def replace(self, states: np.ndarray) -> "StateBatch":
        return StateBatch(states, self.particle_ids)
