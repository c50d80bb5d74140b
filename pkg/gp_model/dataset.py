from typing import Iterable, Protocol, Tuple

import numpy as np

from core.errors import ContractViolation


class TrialData(Protocol):
    observations: np.ndarray  # (T+1, D)
    actions: np.ndarray  # (T, F)


def build_dataset(trials: Iterable[TrialData]) -> Tuple[np.ndarray, np.ndarray]:
    """Eingaben [x_t, u_t] und Ziele x_{t+1} - x_t aus allen übergebenen Trials."""
    inputs, targets = [], []
    for trial in trials:
        obs = np.asarray(trial.observations, dtype=float)
        act = np.asarray(trial.actions, dtype=float)
        if act.ndim == 1:
            act = act[:, None]
        if obs.shape[0] != act.shape[0] + 1:
            raise ContractViolation(f"Trial mit {obs.shape[0]} Beobachtungen und {act.shape[0]} Aktionen")
        if act.shape[0] == 0:
            continue
        inputs.append(np.hstack([obs[:-1], act]))
        targets.append(obs[1:] - obs[:-1])
    if not inputs:
        raise ContractViolation("Keine Übergänge in den Trials")
    return np.vstack(inputs), np.vstack(targets)
