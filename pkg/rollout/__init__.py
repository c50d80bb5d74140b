# Partikel-Rollouts durch das gelernte Modell inklusive Band für den Rückwärtspass
import logging

logger = logging.getLogger(__name__)

from .config import RolloutConfig, RolloutMode
from .linear_model import LinearGaussianModel
from .propagate import (VARIANCE_FLOOR, DynamicsModel, PropagationResult, propagate_step, rollout_batch,
                        rollout_seed)
from .resample import ResampleRecord, gr_resample
from .state_batch import StateBatch
from .tape import TrajectoryRecord

__all__ = [
    "RolloutConfig", "RolloutMode",
    "LinearGaussianModel",
    "VARIANCE_FLOOR", "DynamicsModel", "PropagationResult", "propagate_step", "rollout_batch", "rollout_seed",
    "ResampleRecord", "gr_resample",
    "StateBatch",
    "TrajectoryRecord",
]
