"""Zuordnung Schätzer-Kürzel -> (Rollout-Modus, Schätzfunktion)."""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from core.errors import ConfigError
from gradients.backward import gr_rp_gradient, lr_gradient, rp_gradient, total_propagation
from gradients.estimate import GradEstimate
from gradients.variance import SampleVariance
from rollout.config import RolloutConfig, RolloutMode
from rollout.tape import TrajectoryRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimatorSpec:
    tag: str
    mode: RolloutMode
    fixed_seed: bool
    estimate: Callable[..., GradEstimate]


def _tp(tape: TrajectoryRecord, tag: str, biw: bool = True, strategy: Optional[SampleVariance] = None):
    return total_propagation(tape, biw=biw, strategy=strategy, tag=tag)


ESTIMATORS: Dict[str, EstimatorSpec] = {
    "rp": EstimatorSpec("rp", RolloutMode.PLAIN, False, lambda tape, tag, **_: rp_gradient(tape, tag)),
    "rp_fs": EstimatorSpec("rp_fs", RolloutMode.FIXED_SEED, True, lambda tape, tag, **_: rp_gradient(tape, tag)),
    "gr": EstimatorSpec("gr", RolloutMode.GAUSSIAN_RESAMPLE, False,
                        lambda tape, tag, **_: gr_rp_gradient(tape, tag)),
    "gr_fs": EstimatorSpec("gr_fs", RolloutMode.GAUSSIAN_RESAMPLE, True,
                           lambda tape, tag, **_: gr_rp_gradient(tape, tag)),
    "lr": EstimatorSpec("lr", RolloutMode.PLAIN, False, lambda tape, tag, **_: lr_gradient(tape, False, tag)),
    "biw-lr": EstimatorSpec("biw-lr", RolloutMode.PLAIN, False, lambda tape, tag, **_: lr_gradient(tape, True, tag)),
    "tp": EstimatorSpec("tp", RolloutMode.PLAIN, False, _tp),
}


def get_estimator(tag: str) -> EstimatorSpec:
    try:
        return ESTIMATORS[tag]
    except KeyError:
        error_msg = f"Unbekannter Schätzer '{tag}', erlaubt: {sorted(ESTIMATORS)}"
        logger.error(error_msg)
        raise ConfigError(error_msg) from None


def estimator_rollout_config(tag: str, cfg: RolloutConfig) -> RolloutConfig:
    """Rollout-Konfiguration mit dem Modus, den der Schätzer verlangt."""
    spec = get_estimator(tag)
    return dataclasses.replace(cfg, mode=spec.mode, fixed_seed=spec.fixed_seed)


def estimate_gradient(tag: str, tape: TrajectoryRecord, tp_biw: bool = True,
                      strategy: Optional[SampleVariance] = None) -> GradEstimate:
    spec = get_estimator(tag)
    return spec.estimate(tape, tag, biw=tp_biw, strategy=strategy)
