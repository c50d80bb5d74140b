# Realsystem: Cart-Pole-Dynamik, Beobachtungsrauschen, Sättigung und Kosten
import logging

logger = logging.getLogger(__name__)

from .cartpole import (ACTION_DIM, ANGLE_DIMS, STATE_DIM, CartPole, CartPoleParams, CartPoleState,
                       step_dynamics)
from .costs import (AngleCost, Cost, CostConfig, CostVariant, QuadraticCost, SaturatingQuadraticCost, TipCost,
                    cost, make_cost)
from .initial_state import GaussianInitialState
from .noise import BASE_STDS, NoiseConfig, observe
from .saturation import saturate, saturate_grad
from .trial import TRIAL_CSV_COLUMNS, Controller, TrialRecord, random_controller, run_trial

__all__ = [
    "ACTION_DIM", "ANGLE_DIMS", "STATE_DIM", "CartPole", "CartPoleParams", "CartPoleState", "step_dynamics",
    "AngleCost", "Cost", "CostConfig", "CostVariant", "QuadraticCost", "SaturatingQuadraticCost", "TipCost",
    "cost", "make_cost",
    "GaussianInitialState",
    "BASE_STDS", "NoiseConfig", "observe",
    "saturate", "saturate_grad",
    "TRIAL_CSV_COLUMNS", "Controller", "TrialRecord", "random_controller", "run_trial",
]
