"""Gauß-Resampling: Partikelwolke auf Mittelwert/Kovarianz anpassen und neu ziehen."""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from core.errors import IllConditionedError
from core.logger_service import LoggerService
from core.streams import ParticleStreams, StreamTag
from rollout.state_batch import StateBatch

logger = logging.getLogger(__name__)

JITTER_START = 1e-9
JITTER_MAX = 1e-3


@dataclass(frozen=True)
class ResampleRecord:
    """Mittelwert, verwendete Kovarianz, Cholesky-Faktor und Ziehungen eines Resampling-Schritts.

    mask markiert die Partikel, die in die Statistik eingehen und neu gezogen werden.
    """
    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray
    draws: np.ndarray
    mask: np.ndarray
    jitter: float


def _sample_cov(states: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = states.mean(axis=0)
    centered = states - mean
    return mean, centered.T @ centered / max(states.shape[0] - 1, 1)


def _jittered_cholesky(cov: np.ndarray, n_samples: int,
                       service: LoggerService) -> Tuple[np.ndarray, np.ndarray, float]:
    dim = cov.shape[0]
    # Mit P <= D ist die Stichprobenkovarianz immer singulär
    if n_samples > dim:
        try:
            return cholesky(cov, lower=True), cov, 0.0
        except LinAlgError:
            pass
    trace = float(np.trace(cov))
    scale = trace / dim if trace > 0 else 1.0
    jitter = JITTER_START * scale
    while jitter <= JITTER_MAX * scale:
        jittered = cov + jitter * np.eye(dim)
        try:
            chol = cholesky(jittered, lower=True)
        except LinAlgError:
            jitter *= 10.0
            continue
        service.flag("gr_jitter", f"Stichprobenkovarianz nicht positiv definit, Jitter {jitter:g}")
        return chol, jittered, jitter
    error_msg = f"Stichprobenkovarianz bleibt trotz Jitter {JITTER_MAX:g} * Spur/D nicht positiv definit"
    service.error(error_msg)
    raise IllConditionedError(error_msg)


def gr_resample(states: StateBatch, streams: Optional[ParticleStreams] = None, step: int = 0,
                draws: Optional[np.ndarray] = None,
                mask: Optional[np.ndarray] = None) -> Tuple[StateBatch, ResampleRecord]:
    """x'_i = mu + L z_i mit Stichprobenmittel mu und Kovarianz L L^T (Normierung 1/(P-1)).

    draws ersetzt die Ziehungen z aus dem Strom (z.B. z = 0 in Tests).
    Partikel außerhalb von mask bleiben unverändert.
    """
    service = LoggerService("GaussianResample")
    mask = np.ones(states.n_particles, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    active = states.states[mask]
    if active.shape[0] == 0:
        service.flag("gr_empty", "Keine lebenden Partikel zum Resampling", failure=True)
        empty = np.zeros((states.state_dim, states.state_dim))
        record = ResampleRecord(np.zeros(states.state_dim), empty, empty,
                                np.zeros_like(states.states), mask, 0.0)
        return states, record
    mean, cov = _sample_cov(active)
    chol, cov_used, jitter = _jittered_cholesky(cov, active.shape[0], service)
    if draws is None:
        draws = streams.normals(StreamTag.RESAMPLE, step, states.particle_ids, states.state_dim)
    draws = np.asarray(draws, dtype=float)
    resampled = states.states.copy()
    resampled[mask] = mean + draws[mask] @ chol.T
    record = ResampleRecord(mean=mean, cov=cov_used, chol=chol, draws=draws, mask=mask, jitter=jitter)
    return states.replace(resampled), record
