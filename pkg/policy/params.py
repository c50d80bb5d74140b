import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import ConfigError, ContractViolation
from environment.initial_state import GaussianInitialState
from policy.input_map import PolicyInputMap
from policy.policies import LinearPolicy, Policy, RbfPolicy

logger = logging.getLogger(__name__)

POLICY_KINDS = ("rbf", "linear")
# Anteil der Zentren, die aus der Anfangsverteilung gezogen werden
INITIAL_CENTER_SHARE = 0.04
INIT_WEIGHT_STD = 0.1


@dataclass
class PolicyParams:
    """Architektur plus flacher Parametervektor theta."""
    policy: Policy
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).copy()
        if self.theta.shape != (self.policy.n_params,):
            raise ContractViolation(f"theta der Länge {self.policy.n_params} erwartet, Form {self.theta.shape}")
        if not np.all(np.isfinite(self.theta)):
            raise ContractViolation("Policy-Parameter müssen endlich sein")

    @property
    def n_params(self) -> int:
        return self.policy.n_params

    def groups(self) -> Dict[str, np.ndarray]:
        return {name: self.theta[s].copy() for name, s in self.policy.param_groups.items()}

    def with_theta(self, theta) -> "PolicyParams":
        return PolicyParams(self.policy, theta)


@dataclass(frozen=True)
class PolicyEnvInfo:
    """Was die Initialisierung über das System wissen muss."""
    state_dim: int = 4
    action_dim: int = 1
    angle_dims: Tuple[int, ...] = (1,)
    u_max: Optional[float] = 10.0
    initial_state: GaussianInitialState = field(default_factory=GaussianInitialState)
    # Plausibler Bereich des Aufschwingens: s, beta, s_dot, beta_dot
    swing_up_low: Tuple[float, ...] = (-1.0, -np.pi, -2.0, -6.0)
    swing_up_high: Tuple[float, ...] = (1.0, np.pi, 2.0, 6.0)


def make_policy(kind: str, env: PolicyEnvInfo, n_basis: int = 50) -> Policy:
    input_map = PolicyInputMap(env.state_dim, env.angle_dims)
    if kind == "rbf":
        return RbfPolicy(input_map, env.action_dim, env.u_max, n_basis)
    if kind == "linear":
        return LinearPolicy(input_map, env.action_dim, env.u_max)
    error_msg = f"Unbekannter Policy-Typ '{kind}', erlaubt: {POLICY_KINDS}"
    logger.error(error_msg)
    raise ConfigError(error_msg)


def policy_init(kind: str, rng: np.random.Generator, env: PolicyEnvInfo, n_basis: int = 50) -> PolicyParams:
    policy = make_policy(kind, env, n_basis)
    if isinstance(policy, LinearPolicy):
        matrix = rng.normal(0.0, INIT_WEIGHT_STD, size=(policy.action_dim, policy.input_dim))
        return PolicyParams(policy, policy.pack(matrix, np.zeros(policy.action_dim)))
    n_initial = min(policy.n_basis, max(1, int(round(INITIAL_CENTER_SHARE * policy.n_basis))))
    initial_states = env.initial_state.sample_rng(rng, n_initial)
    low, high = np.asarray(env.swing_up_low, dtype=float), np.asarray(env.swing_up_high, dtype=float)
    swing_states = rng.uniform(low, high, size=(policy.n_basis - n_initial, env.state_dim))
    centers = policy.input_map.apply(np.vstack([initial_states, swing_states]))
    spread = centers.max(axis=0) - centers.min(axis=0)
    lengthscales = np.where(spread > 0, spread / 5.0, 1.0)
    weights = rng.normal(0.0, INIT_WEIGHT_STD, size=(policy.n_basis, policy.action_dim))
    logger.debug(f"RBF-Policy initialisiert: {policy.n_basis} Zentren, {n_initial} aus p(x0)")
    return PolicyParams(policy, policy.pack(centers, lengthscales, weights))


def policy_eval(params: PolicyParams, x) -> np.ndarray:
    """Aktion für einen einzelnen Zustand."""
    return params.policy.evaluate(params.theta, np.asarray(x, dtype=float)[None, :])[0]


def policy_jacobians(params: PolicyParams, x) -> Tuple[np.ndarray, np.ndarray]:
    """(du/dx: F x D, du/dtheta: F x |theta|) für einen einzelnen Zustand."""
    _, du_dx, du_dtheta = params.policy.jacobians(params.theta, np.asarray(x, dtype=float)[None, :])
    return du_dx[0], du_dtheta[0]


def frozen_mask(params: PolicyParams, frozen: Sequence[str] = ()) -> np.ndarray:
    return params.policy.freeze_mask(frozen)
