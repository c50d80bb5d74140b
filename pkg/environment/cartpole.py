"""Cart-Pole-Simulator (Wagen mit homogenem Stab), RK4 mit Halteglied nullter Ordnung.

Zustand x = [s, beta, s_dot, beta_dot]; beta = 0 ist aufrecht, beta = pi hängt
nach unten. Der Winkel wird nie modular reduziert.
"""
import logging
from dataclasses import dataclass, asdict
from typing import Dict, NamedTuple

import numpy as np

from core.errors import ContractViolation

logger = logging.getLogger(__name__)

STATE_DIM = 4
ACTION_DIM = 1
ANGLE_DIMS = (1,)
_FORCE_TOL = 1e-9


class CartPoleState(NamedTuple):
    s: float
    beta: float
    s_dot: float
    beta_dot: float


@dataclass(frozen=True)
class CartPoleParams:
    cart_mass: float = 0.5
    pole_mass: float = 0.5
    pole_length: float = 0.6
    friction: float = 0.1
    gravity: float = 9.82
    u_max: float = 10.0
    control_period: float = 0.1
    substeps: int = 5

    def __post_init__(self):
        for name in ("cart_mass", "pole_mass", "pole_length", "gravity", "u_max", "control_period"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} muss positiv sein, erhalten: {getattr(self, name)}")
        if self.friction < 0 or self.substeps < 1:
            raise ContractViolation("friction >= 0 und substeps >= 1 erforderlich")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _as_state(state) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape[-1] != STATE_DIM:
        raise ContractViolation(f"Cart-Pole-Zustand hat {STATE_DIM} Komponenten, Form {state.shape}")
    if not np.all(np.isfinite(state)):
        error_msg = f"Nicht-endlicher Zustand: {state}"
        logger.error(error_msg)
        raise ContractViolation(error_msg)
    return state


class CartPole:
    """Realsystem der Lernschleife."""

    def __init__(self, params: CartPoleParams = CartPoleParams()):
        self.params = params

    @property
    def u_max(self) -> float:
        return self.params.u_max

    def derivatives(self, state: np.ndarray, force: float) -> np.ndarray:
        p = self.params
        m, l = p.pole_mass, p.pole_length
        s_dot, beta, beta_dot = state[..., 2], state[..., 1], state[..., 3]
        sin_b, cos_b = np.sin(beta), np.cos(beta)
        s_acc = ((2.0 * m * l * beta_dot ** 2 * sin_b + 4.0 * force - 4.0 * p.friction * s_dot
                  - 3.0 * m * p.gravity * sin_b * cos_b)
                 / (4.0 * (p.cart_mass + m) - 3.0 * m * cos_b ** 2))
        beta_acc = 3.0 / (2.0 * l) * (p.gravity * sin_b - cos_b * s_acc)
        return np.stack([s_dot, beta_dot, s_acc, beta_acc], axis=-1)

    def step_dynamics(self, state, force: float, dt: float) -> np.ndarray:
        """Ein RK4-Schritt der Länge dt bei konstanter Kraft."""
        state = _as_state(state)
        if not dt > 0:
            raise ContractViolation(f"dt muss positiv sein, erhalten: {dt}")
        force = float(np.asarray(force, dtype=float).reshape(-1)[0])
        if abs(force) > self.params.u_max + _FORCE_TOL:
            error_msg = f"Kraft {force} überschreitet u_max={self.params.u_max}"
            logger.error(error_msg)
            raise ContractViolation(error_msg)
        k1 = self.derivatives(state, force)
        k2 = self.derivatives(state + 0.5 * dt * k1, force)
        k3 = self.derivatives(state + 0.5 * dt * k2, force)
        k4 = self.derivatives(state + dt * k3, force)
        return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def control_step(self, state, force: float) -> np.ndarray:
        """Eine Regelperiode (Standard 0.1 s) in gleich langen Teilschritten."""
        dt = self.params.control_period / self.params.substeps
        for _ in range(self.params.substeps):
            state = self.step_dynamics(state, force, dt)
        return state

    def energy(self, state) -> float:
        """Mechanische Energie (bei Reibung 0 und Kraft 0 erhalten)."""
        p = self.params
        s_dot, beta, beta_dot = state[2], state[1], state[3]
        m, l = p.pole_mass, p.pole_length
        kinetic = (0.5 * (p.cart_mass + m) * s_dot ** 2 + 0.5 * m * l * np.cos(beta) * s_dot * beta_dot
                   + m * l ** 2 * beta_dot ** 2 / 6.0)
        return float(kinetic + m * p.gravity * 0.5 * l * np.cos(beta))


def step_dynamics(state, force: float, dt: float, params: CartPoleParams = CartPoleParams()) -> np.ndarray:
    return CartPole(params).step_dynamics(state, force, dt)
