import logging
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from environment.cartpole import CartPole
from environment.costs import Cost
from environment.initial_state import GaussianInitialState
from environment.noise import NoiseConfig, observe

logger = logging.getLogger(__name__)

Controller = Callable[[np.ndarray], np.ndarray]

TRIAL_CSV_COLUMNS = ["t", "s", "beta", "s_dot", "beta_dot", "u", "cost"]


@dataclass
class TrialRecord:
    """Ein Durchlauf am Realsystem; das GP lernt aus den verrauschten Beobachtungen."""
    true_states: np.ndarray  # (T+1, D)
    observations: np.ndarray  # (T+1, D)
    actions: np.ndarray  # (T, F)
    costs: np.ndarray  # (T+1,), auf dem wahren Zustand

    @property
    def horizon(self) -> int:
        return int(self.actions.shape[0])

    @property
    def total_cost(self) -> float:
        return float(np.sum(self.costs))

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.costs))

    def csv_rows(self) -> List[List[object]]:
        rows = []
        for t in range(self.horizon + 1):
            u = float(self.actions[t, 0]) if t < self.horizon else ""
            rows.append([t] + [float(v) for v in self.observations[t]] + [u, float(self.costs[t])])
        return rows


def run_trial(env: CartPole, controller: Controller, horizon: int, noise: NoiseConfig,
              rng: np.random.Generator, initial_state: GaussianInitialState, cost: Cost) -> TrialRecord:
    state = initial_state.sample_rng(rng, 1)[0]
    true_states, observations, actions = [state], [observe(state, noise, rng)], []
    for _ in range(horizon):
        u = np.clip(np.atleast_1d(np.asarray(controller(observations[-1]), dtype=float)), -env.u_max, env.u_max)
        state = env.control_step(state, u[0])
        actions.append(u)
        true_states.append(state)
        observations.append(observe(state, noise, rng))
    true_states = np.array(true_states)
    record = TrialRecord(true_states=true_states, observations=np.array(observations),
                         actions=np.array(actions).reshape(horizon, -1), costs=np.asarray(cost(true_states)))
    logger.debug(f"Trial mit T={horizon}: Gesamtkosten {record.total_cost:.4f}")
    return record


def random_controller(u_max: float, rng: np.random.Generator, action_dim: int = 1) -> Controller:
    """Gleichverteilte Aktionen in [-u_max, u_max] je Regelschritt."""
    def controller(_observation: np.ndarray) -> np.ndarray:
        return rng.uniform(-u_max, u_max, size=action_dim)
    return controller
