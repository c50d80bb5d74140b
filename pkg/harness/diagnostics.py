"""Diagnosen: Wertelandschaft entlang einer Zufallsrichtung und Gradientenvarianz über P."""
import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.logger_service import LoggerService
from core.streams import StreamTag, derive_seed
from environment.costs import make_cost
from gp_model.gp_model import GpModel
from gradients.estimate import GradEstimate
from gradients.registry import estimate_gradient, get_estimator
from gradients.variance import make_strategy
from harness.config import ExperimentConfig
from policy.params import PolicyParams
from rollout.config import RolloutConfig, RolloutMode
from rollout.propagate import rollout_batch
from rollout.tape import TrajectoryRecord

logger = logging.getLogger(__name__)

GRADVAR_COLUMNS = ["estimator", "n_particles", "variance", "mean_estimated_variance"]


def landscape_columns(estimators: Sequence[str]) -> List[str]:
    columns = ["dtheta", "mean_return", "se_return"]
    for tag in estimators:
        columns += [f"{tag}_grad", f"{tag}_se", f"{tag}_trace_var"]
    return columns


def random_direction(n_params: int, seed: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Zufällige Einheitsrichtung im Parameterraum (eingefrorene Koordinaten 0)."""
    direction = np.random.default_rng(seed).standard_normal(n_params)
    if mask is not None:
        direction = np.where(mask, direction, 0.0)
    return direction / np.linalg.norm(direction)


def _tape_key(tag: str) -> RolloutMode:
    mode = get_estimator(tag).mode
    return RolloutMode.GAUSSIAN_RESAMPLE if mode is RolloutMode.GAUSSIAN_RESAMPLE else RolloutMode.PLAIN


def _shared_tapes(model, params: PolicyParams, base: RolloutConfig, estimators: Sequence[str], cfg: ExperimentConfig,
                  call_index: int = 0) -> Dict[RolloutMode, TrajectoryRecord]:
    """Ein Band pro benötigtem Vorhersagemodus; Schätzer desselben Modus teilen sich das Band."""
    cost = make_cost(cfg.cost_config())
    initial_state = cfg.initial_state()
    tapes = {}
    for mode in sorted({_tape_key(tag) for tag in estimators}, key=lambda m: m.value):
        mode_cfg = dataclasses.replace(base, mode=mode)
        tapes[mode] = rollout_batch(model, params, mode_cfg, initial_state, cost, call_index)
    return tapes


def _estimate_all(tapes: Dict[RolloutMode, TrajectoryRecord], estimators: Sequence[str],
                  cfg: ExperimentConfig) -> Dict[str, GradEstimate]:
    est_cfg = cfg.estimator
    return {tag: estimate_gradient(tag, tapes[_tape_key(tag)], est_cfg.tp_biw,
                                   make_strategy(est_cfg.variance_strategy, est_cfg.ema_decay, est_cfg.subset))
            for tag in estimators}


def landscape_scan(cfg: ExperimentConfig, model: GpModel, params: PolicyParams, direction_seed: Optional[int] = None,
                   grid: Optional[Sequence[float]] = None) -> Tuple[List[str], List[List[float]]]:
    """Rückgabe und projizierte Gradienten entlang theta_0 + dtheta * d bei festem Rollout-Seed."""
    service = LoggerService("Landscape")
    settings = cfg.landscape
    if grid is None:
        grid = np.linspace(-settings.half_width, settings.half_width, settings.grid_points)
    if direction_seed is None:
        direction_seed = derive_seed(cfg.seed, StreamTag.DIRECTION)
    mask = params.policy.freeze_mask(cfg.policy.frozen)
    direction = random_direction(params.n_params, direction_seed, mask)
    base = dataclasses.replace(cfg.rollout_config(0, n_particles=settings.n_particles), fixed_seed=True)
    rows = []
    for delta in grid:
        shifted = params.with_theta(params.theta + float(delta) * direction)
        tapes = _shared_tapes(model, shifted, base, settings.estimators, cfg)
        plain = tapes.get(RolloutMode.PLAIN) or next(iter(tapes.values()))
        row = [float(delta), plain.mean_return(), plain.return_standard_error()]
        for tag, estimate in _estimate_all(tapes, settings.estimators, cfg).items():
            value, se = estimate.projected(direction)
            row += [value, se, estimate.trace_variance()]
        rows.append(row)
        service.debug(f"dtheta={float(delta):+.4f}: Rückgabe {row[1]:.4f}")
    service.info(f"Landschaft mit {len(rows)} Punkten berechnet")
    return landscape_columns(settings.estimators), rows


def variance_scan(cfg: ExperimentConfig, model: GpModel, params: PolicyParams,
                  particle_counts: Optional[Sequence[int]] = None,
                  repetitions: Optional[int] = None) -> Tuple[List[str], List[List[object]]]:
    """Spur der Varianz jedes Schätzers über unabhängige Wiederholungen, je Partikelzahl."""
    service = LoggerService("GradientVariance")
    settings = cfg.gradvar
    particle_counts = list(particle_counts or settings.particle_counts)
    repetitions = repetitions or settings.repetitions
    estimators = settings.estimators
    rows = []
    for n_particles in particle_counts:
        def one(rep: int) -> Dict[str, GradEstimate]:
            rollout_cfg = RolloutConfig(n_particles=n_particles, horizon=cfg.rollout.horizon,
                                        drop_model_uncertainty=cfg.rollout.drop_model_uncertainty,
                                        noise_variance_multiplier=cfg.rollout.noise_variance_multiplier,
                                        fixed_seed=True,
                                        seed=derive_seed(cfg.seed, StreamTag.GRADVAR, n_particles, rep))
            return _estimate_all(_shared_tapes(model, params, rollout_cfg, estimators, cfg), estimators, cfg)

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(one, range(repetitions)))
        else:
            results = [one(rep) for rep in range(repetitions)]
        for tag in estimators:
            means = np.array([r[tag].mean for r in results])
            with np.errstate(over="ignore", invalid="ignore"):
                variance = float(np.sum(means.var(axis=0, ddof=1)))
            internal = float(np.mean([r[tag].trace_variance() for r in results]))
            rows.append([tag, n_particles, variance, internal])
            service.info(f"{tag}, P={n_particles}: Spur der Varianz {variance:.4g}")
    return GRADVAR_COLUMNS, rows
