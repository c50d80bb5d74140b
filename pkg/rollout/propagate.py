"""Partikel-Vorhersage durch das gelernte Modell (ein Schritt und ganzer Horizont)."""
import logging
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from core.errors import ContractViolation
from core.logger_service import LoggerService
from core.streams import ParticleStreams, StreamTag, derive_seed
from environment.costs import Cost
from environment.initial_state import GaussianInitialState
from gp_model.gp_model import ModelPrediction
from policy.params import PolicyParams
from rollout.config import RolloutConfig
from rollout.resample import gr_resample
from rollout.state_batch import StateBatch
from rollout.tape import TrajectoryRecord

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12


class DynamicsModel(Protocol):
    state_dim: int
    action_dim: int

    def predict_batch(self, inputs: np.ndarray, with_grads: bool = False) -> ModelPrediction:
        ...


@dataclass
class PropagationResult:
    next_states: StateBatch
    actions: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    eps: np.ndarray
    dmu_dx: np.ndarray
    dmu_du: np.ndarray
    dsigma_dx: np.ndarray
    dsigma_du: np.ndarray
    du_dx: np.ndarray
    du_dtheta: np.ndarray


def propagate_step(model: DynamicsModel, params: PolicyParams, states: StateBatch, cfg: RolloutConfig,
                   streams: Optional[ParticleStreams] = None, step: int = 0,
                   eps: Optional[np.ndarray] = None) -> PropagationResult:
    """u = pi(x), Vorhersage an [x, u], Ablationen auf sigma_f^2 / sigma_n^2, dann x' = mu + sigma * eps."""
    x = states.states
    dim = states.state_dim
    if dim != model.state_dim:
        raise ContractViolation(f"Zustandsdimension {dim} passt nicht zum Modell ({model.state_dim})")
    if eps is None and streams is None:
        raise ContractViolation("propagate_step benötigt Zufallsströme oder vorgegebene eps")
    if eps is not None and np.shape(eps) != x.shape:
        raise ContractViolation(f"eps hat die Form {np.shape(eps)}, erwartet {x.shape}")
    u, du_dx, du_dtheta = params.policy.jacobians(params.theta, x)
    pred = model.predict_batch(np.hstack([x, u]), with_grads=True)

    latent_scale = 0.0 if cfg.drop_model_uncertainty else 1.0
    variance = latent_scale * pred.var_f + cfg.noise_variance_multiplier * pred.var_n
    clamped = variance < VARIANCE_FLOOR
    if np.any(clamped):
        LoggerService("Rollout").flag("variance_floor",
                                      f"{int(clamped.sum())} Varianzen in Schritt {step} auf {VARIANCE_FLOOR:g} geklemmt")
    sigma = np.sqrt(np.maximum(variance, VARIANCE_FLOOR))
    mu = x + pred.mean

    dmu_dx = np.eye(dim) + pred.dmean[:, :, :dim]
    dmu_du = pred.dmean[:, :, dim:]
    with np.errstate(invalid="ignore", divide="ignore"):
        dsigma = np.where(clamped[:, :, None], 0.0, latent_scale * pred.dvar_f / (2.0 * sigma[:, :, None]))

    if eps is None:
        eps = streams.normals(StreamTag.TRANSITION, step, states.particle_ids, dim)
    eps = np.asarray(eps, dtype=float)
    next_states = mu + sigma * eps
    return PropagationResult(next_states=states.replace(next_states), actions=u, mu=mu, sigma=sigma, eps=eps,
                             dmu_dx=dmu_dx, dmu_du=dmu_du, dsigma_dx=dsigma[:, :, :dim],
                             dsigma_du=dsigma[:, :, dim:], du_dx=du_dx, du_dtheta=du_dtheta)


def _finite_rows(*arrays: np.ndarray) -> np.ndarray:
    ok = None
    for arr in arrays:
        row_ok = np.all(np.isfinite(arr.reshape(arr.shape[0], -1)), axis=1)
        ok = row_ok if ok is None else ok & row_ok
    return ok


def _freeze(res: PropagationResult, frozen: np.ndarray, inputs: np.ndarray) -> None:
    """Hält abgeschnittene Partikel an ihrem letzten endlichen Zustand fest."""
    dim = inputs.shape[1]
    res.mu[frozen] = inputs[frozen]
    res.sigma[frozen] = 0.0
    res.eps[frozen] = 0.0
    res.next_states.states[frozen] = inputs[frozen]
    res.dmu_dx[frozen] = np.eye(dim)
    for arr in (res.dmu_du, res.dsigma_dx, res.dsigma_du, res.du_dx, res.du_dtheta):
        arr[frozen] = 0.0


def rollout_seed(cfg: RolloutConfig, call_index: int = 0) -> int:
    """Fester Seed im Fixed-Seed-Betrieb, sonst ein eigener Strom pro Aufruf."""
    if cfg.seed_is_fixed:
        return int(cfg.seed)
    return derive_seed(cfg.seed, StreamTag.ROLLOUT, call_index)


def rollout_batch(model: DynamicsModel, params: PolicyParams, cfg: RolloutConfig,
                  initial_state: GaussianInitialState, cost: Cost, call_index: int = 0) -> TrajectoryRecord:
    service = LoggerService("Rollout")
    n_particles, horizon, dim = cfg.n_particles, cfg.horizon, model.state_dim
    if initial_state.dim != dim:
        raise ContractViolation(f"Anfangsverteilung hat {initial_state.dim} statt {dim} Dimensionen")
    streams = ParticleStreams(rollout_seed(cfg, call_index))
    ids = np.arange(n_particles)
    batch = StateBatch(initial_state.sample(streams.normals(StreamTag.INITIAL_STATE, 0, ids, dim)), ids)

    n_actions, n_params = params.policy.action_dim, params.n_params
    states = np.zeros((horizon + 1, n_particles, dim))
    inputs = np.zeros((horizon, n_particles, dim))
    actions = np.zeros((horizon, n_particles, n_actions))
    mu, sigma, eps = (np.zeros((horizon, n_particles, dim)) for _ in range(3))
    dmu_dx, dsigma_dx = (np.zeros((horizon, n_particles, dim, dim)) for _ in range(2))
    dmu_du, dsigma_du = (np.zeros((horizon, n_particles, dim, n_actions)) for _ in range(2))
    du_dx = np.zeros((horizon, n_particles, n_actions, dim))
    du_dtheta = np.zeros((horizon, n_particles, n_actions, n_params))
    alive = np.ones((horizon + 1, n_particles), dtype=bool)
    resamples = []

    for t in range(horizon):
        states[t] = batch.states
        record = None
        if cfg.resamples and t >= 1:
            batch, record = gr_resample(batch, streams, t, mask=alive[t])
        resamples.append(record)
        inputs[t] = batch.states
        res = propagate_step(model, params, batch, cfg, streams, t)
        ok = alive[t] & _finite_rows(res.next_states.states, res.mu, res.sigma, res.dmu_dx, res.dmu_du,
                                     res.dsigma_dx, res.dsigma_du)
        newly_dead = alive[t] & ~ok
        if np.any(newly_dead):
            service.flag("particle_truncated",
                         f"{int(newly_dead.sum())} Partikel in Schritt {t} nicht endlich, Band abgeschnitten",
                         failure=True)
        _freeze(res, ~ok, batch.states)
        alive[t + 1] = ok
        actions[t], mu[t], sigma[t], eps[t] = res.actions, res.mu, res.sigma, res.eps
        dmu_dx[t], dmu_du[t], dsigma_dx[t], dsigma_du[t] = res.dmu_dx, res.dmu_du, res.dsigma_dx, res.dsigma_du
        du_dx[t], du_dtheta[t] = res.du_dx, res.du_dtheta
        batch = res.next_states
    states[horizon] = batch.states

    costs = np.where(alive, cost(states), 0.0)
    cost_grads = np.where(alive[:, :, None], cost.grad(states), 0.0)
    tape = TrajectoryRecord(config=cfg, states=states, inputs=inputs, actions=actions, mu=mu, sigma=sigma, eps=eps,
                            costs=costs, cost_grads=cost_grads, dmu_dx=dmu_dx, dmu_du=dmu_du, dsigma_dx=dsigma_dx,
                            dsigma_du=dsigma_du, du_dx=du_dx, du_dtheta=du_dtheta, alive=alive,
                            particle_ids=ids, resamples=resamples)
    logger.debug(f"Rollout P={n_particles}, T={horizon}: mittlere Rückgabe {tape.mean_return():.4f}")
    return tape
