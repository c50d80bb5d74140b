from typing import Sequence, Tuple

import numpy as np

from core.errors import ContractViolation


class PolicyInputMap:
    """Ersetzt jede Winkeldimension durch (sin, cos); ohne Winkel die Identität."""

    def __init__(self, state_dim: int, angle_dims: Sequence[int] = ()):
        self.state_dim = int(state_dim)
        self.angle_dims: Tuple[int, ...] = tuple(sorted(int(d) for d in angle_dims))
        if any(d < 0 or d >= self.state_dim for d in self.angle_dims):
            raise ContractViolation(f"Winkeldimensionen {self.angle_dims} außerhalb von [0, {self.state_dim})")
        self._plain = [d for d in range(self.state_dim) if d not in self.angle_dims]

    @property
    def output_dim(self) -> int:
        return self.state_dim + len(self.angle_dims)

    def _check(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if states.shape[-1] != self.state_dim:
            raise ContractViolation(f"Zustand mit {states.shape[-1]} statt {self.state_dim} Dimensionen")
        if not np.all(np.isfinite(states)):
            raise ContractViolation("Policy-Eingabe enthält nicht-endliche Werte")
        return states

    def apply(self, states) -> np.ndarray:
        """(P, D) -> (P, D_in): erst die übrigen Dimensionen, dann je Winkel sin und cos."""
        states = self._check(states)
        angles = states[:, self.angle_dims]
        return np.hstack([states[:, self._plain], np.sin(angles), np.cos(angles)])

    def jacobian(self, states) -> np.ndarray:
        states = self._check(states)
        n_batch = states.shape[0]
        jac = np.zeros((n_batch, self.output_dim, self.state_dim))
        for row, d in enumerate(self._plain):
            jac[:, row, d] = 1.0
        n_plain, n_angle = len(self._plain), len(self.angle_dims)
        for k, d in enumerate(self.angle_dims):
            jac[:, n_plain + k, d] = np.cos(states[:, d])
            jac[:, n_plain + n_angle + k, d] = -np.sin(states[:, d])
        return jac
