"""Kostenfunktionen der Form 1 - exp(-(x - t)^T Q (x - t)) und quadratische Kosten.

Alle Kosten arbeiten auf Batches (..., D) und liefern mit ``grad`` den
Gradienten nach dem Zustand, den der RP-Rückwärtspass benötigt.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from core.errors import ConfigError

logger = logging.getLogger(__name__)


class CostVariant(str, Enum):
    ANGLE = "AngleCost"
    TIP = "TipCost"
    QUADRATIC = "QuadraticCost"


class Cost:
    state_dim: int

    def __call__(self, states) -> np.ndarray:
        raise NotImplementedError

    def grad(self, states) -> np.ndarray:
        raise NotImplementedError


class SaturatingQuadraticCost(Cost):
    def __init__(self, weights, target):
        self.weights = np.atleast_2d(np.asarray(weights, dtype=float))
        self.target = np.asarray(target, dtype=float)
        self.state_dim = self.target.size

    def _quad(self, states) -> Tuple[np.ndarray, np.ndarray]:
        diff = np.asarray(states, dtype=float) - self.target
        return np.einsum('...i,ij,...j->...', diff, self.weights, diff), diff

    def __call__(self, states) -> np.ndarray:
        quad, _ = self._quad(states)
        return 1.0 - np.exp(-quad)

    def grad(self, states) -> np.ndarray:
        quad, diff = self._quad(states)
        sym = self.weights + self.weights.T
        return np.exp(-quad)[..., None] * (diff @ sym.T)


class AngleCost(SaturatingQuadraticCost):
    """Q = diag(1, 1, 0, 0) auf den Rohkoordinaten (s, beta); nur eine Zielrichtung."""

    def __init__(self, state_dim: int = 4):
        weights = np.zeros((state_dim, state_dim))
        weights[0, 0] = weights[1, 1] = 1.0
        super().__init__(weights, np.zeros(state_dim))


class TipCost(Cost):
    """Abstand der Stabspitze (s + l sin beta, l cos beta) zur aufrechten Lage (0, l)."""

    def __init__(self, pole_length: float = 0.6, lengthscale: float = 0.25, state_dim: int = 4):
        self.pole_length = pole_length
        self.lengthscale = lengthscale
        self.state_dim = state_dim

    def _offsets(self, states):
        states = np.asarray(states, dtype=float)
        s, beta = states[..., 0], states[..., 1]
        l = self.pole_length
        dx = s + l * np.sin(beta)
        dy = l * np.cos(beta) - l
        return states, beta, dx, dy

    def __call__(self, states) -> np.ndarray:
        _, _, dx, dy = self._offsets(states)
        return 1.0 - np.exp(-(dx ** 2 + dy ** 2) / self.lengthscale ** 2)

    def grad(self, states) -> np.ndarray:
        states, beta, dx, dy = self._offsets(states)
        l = self.lengthscale
        scale = np.exp(-(dx ** 2 + dy ** 2) / l ** 2) / l ** 2
        result = np.zeros_like(states)
        result[..., 0] = scale * 2.0 * dx
        result[..., 1] = scale * 2.0 * (dx * self.pole_length * np.cos(beta) - dy * self.pole_length * np.sin(beta))
        return result


class QuadraticCost(Cost):
    """Unbeschränkte Kosten (x - t)^T Q (x - t) für analytisch lösbare Ketten."""

    def __init__(self, weights, target=None):
        self.weights = np.atleast_2d(np.asarray(weights, dtype=float))
        self.state_dim = self.weights.shape[0]
        self.target = np.zeros(self.state_dim) if target is None else np.asarray(target, dtype=float)

    def __call__(self, states) -> np.ndarray:
        diff = np.asarray(states, dtype=float) - self.target
        return np.einsum('...i,ij,...j->...', diff, self.weights, diff)

    def grad(self, states) -> np.ndarray:
        diff = np.asarray(states, dtype=float) - self.target
        return diff @ (self.weights + self.weights.T).T


@dataclass(frozen=True)
class CostConfig:
    variant: CostVariant = CostVariant.ANGLE
    target: Optional[Tuple[float, ...]] = None
    weights: Optional[Tuple[Tuple[float, ...], ...]] = None
    tip_lengthscale: float = 0.25
    pole_length: float = 0.6
    state_dim: int = 4


def make_cost(cfg: CostConfig) -> Cost:
    variant = CostVariant(cfg.variant)
    if variant is CostVariant.TIP:
        return TipCost(cfg.pole_length, cfg.tip_lengthscale, cfg.state_dim)
    if variant is CostVariant.ANGLE and cfg.weights is None:
        return AngleCost(cfg.state_dim)
    if cfg.weights is None:
        error_msg = f"Kostenvariante {variant.value} benötigt eine Gewichtsmatrix"
        logger.error(error_msg)
        raise ConfigError(error_msg)
    target = cfg.target if cfg.target is not None else np.zeros(cfg.state_dim)
    if variant is CostVariant.QUADRATIC:
        return QuadraticCost(cfg.weights, target)
    return SaturatingQuadraticCost(cfg.weights, target)


def cost(state, cfg: CostConfig) -> float:
    return float(make_cost(cfg)(state))
