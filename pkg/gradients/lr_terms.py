"""Likelihood-Ratio-Terme eines Zeitschritts: Scores, Baselines, BIW-Gewichte.

Zeitschritt s (1 <= s <= T) betrachtet die Zustände x_s und die
Verteilungsparameter zeta_s = (mu[s-1], sigma[s-1]), die sie erzeugt haben.
Mit biw=True wird die Zustandsverteilung als Mischung über alle Partikel
behandelt (P^2 Terme, Gewichte im Log-Raum blockweise berechnet).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from core.errors import ContractViolation
from core.logger_service import LoggerService
from rollout.tape import TrajectoryRecord

logger = logging.getLogger(__name__)

_LOG_2PI = float(np.log(2.0 * np.pi))
# Obergrenze für Block x P x D Zwischenarrays
BLOCK_ELEMENTS = 4_000_000
KEEP_WEIGHTS_MAX = 2048


@dataclass
class StepLrTerms:
    """LR-Terme eines Zeitschritts.

    grad_mu / grad_sigma sind die LR-Gradienten nach zeta_s je Quellpartikel
    (bei biw=False der Diagonalterm (G_i - b_i) * Score). weights[i, j] ist das
    normierte Gewicht p(x_j | zeta_i) / sum_k p(x_j | zeta_k) (nur für moderate P).
    """
    step: int
    biw: bool
    returns: np.ndarray
    baselines: np.ndarray
    score_mu: np.ndarray
    score_sigma: np.ndarray
    grad_mu: np.ndarray
    grad_sigma: np.ndarray
    log_mixture: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None


def loo_baseline(returns: np.ndarray) -> np.ndarray:
    """Leave-one-out-Mittel; für ein einzelnes Partikel 0."""
    n = returns.size
    if n < 2:
        return np.zeros(n)
    return (returns.sum() - returns) / (n - 1)


def _check_step(tape: TrajectoryRecord, step: int) -> None:
    if tape.has_resampling:
        raise ContractViolation("LR-Terme erfordern ein Band ohne Gauß-Resampling")
    if not 1 <= step <= tape.horizon:
        raise ContractViolation(f"Zeitschritt {step} außerhalb von [1, {tape.horizon}]")


def _block_size(n_targets: int, dim: int) -> int:
    return int(max(1, min(n_targets, BLOCK_ELEMENTS // max(n_targets * dim, 1))))


def _log_density_block(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray):
    """log N(x_j; mu_i, diag(sigma_i^2)) für einen Block von Quellen i, Form (B, n)."""
    diff = x[None, :, :] - mu[:, None, :]
    scaled = diff / sigma[:, None, :]
    log_norm = np.sum(np.log(sigma), axis=1) + 0.5 * x.shape[1] * _LOG_2PI
    return -0.5 * np.sum(scaled ** 2, axis=-1) - log_norm[:, None], diff


def _log_mixture(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray, service: LoggerService):
    """log sum_k p(x_j | zeta_k) je Ziel j, blockweise über die Quellen k."""
    n, dim = x.shape
    block = _block_size(n, dim)
    log_z = np.full(n, -np.inf)
    for start in range(0, mu.shape[0], block):
        lp, _ = _log_density_block(x, mu[start:start + block], sigma[start:start + block])
        log_z = np.logaddexp(log_z, logsumexp(lp, axis=0))
    targets_ok = np.isfinite(log_z)
    if not np.all(targets_ok):
        service.flag("mixture_underflow", f"{int((~targets_ok).sum())} Mischungsdichten sind 0, Paare verworfen")
    return log_z, targets_ok, np.where(targets_ok, log_z, 0.0)


def _biw_terms(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray, returns: np.ndarray, service: LoggerService):
    n, dim = x.shape
    block = _block_size(n, dim)
    log_z, targets_ok, safe_log_z = _log_mixture(x, mu, sigma, service)

    baselines = np.zeros(n)
    grad_mu = np.zeros((n, dim))
    grad_sigma = np.zeros((n, dim))
    weights = np.zeros((n, n)) if n <= KEEP_WEIGHTS_MAX else None
    loo = loo_baseline(returns)
    fallbacks = 0
    for start in range(0, n, block):
        stop = min(start + block, n)
        rows = np.arange(stop - start)
        lp, diff = _log_density_block(x, mu[start:stop], sigma[start:stop])
        w = np.where(targets_ok[None, :], np.exp(lp - safe_log_z[None, :]), 0.0)
        if weights is not None:
            weights[start:stop] = w
        w_off = w.copy()
        w_off[rows, start + rows] = 0.0
        denom = w_off.sum(axis=1)
        if n > 1:
            use_loo = ~(denom > 0)
            fallbacks += int(use_loo.sum())
            with np.errstate(invalid="ignore", divide="ignore"):
                b = np.where(use_loo, loo[start:stop], (w_off @ returns) / np.where(use_loo, 1.0, denom))
        else:
            b = np.zeros(stop - start)
        baselines[start:stop] = b
        adv = w * (returns[None, :] - b[:, None])
        row_sum = adv.sum(axis=1)
        sig = sigma[start:stop]
        grad_mu[start:stop] = np.einsum('ij,ijd->id', adv, diff) / sig ** 2
        grad_sigma[start:stop] = np.einsum('ij,ijd->id', adv, diff ** 2) / sig ** 3 - row_sum[:, None] / sig
    if fallbacks:
        service.flag("biw_baseline_fallback", f"{fallbacks} Baselines ohne Gewicht, ungewichtetes LOO-Mittel")
    return baselines, grad_mu, grad_sigma, log_z, weights


def lr_step_terms(tape: TrajectoryRecord, step: int, biw: bool) -> StepLrTerms:
    _check_step(tape, step)
    service = LoggerService("LikelihoodRatio")
    n_particles, dim = tape.n_particles, tape.state_dim
    alive = tape.alive[step]
    idx = np.flatnonzero(alive)
    returns_all = tape.returns_to_go()[step]

    x = tape.states[step][idx]
    mu = tape.mu[step - 1][idx]
    sigma = tape.sigma[step - 1][idx]
    eps = tape.eps[step - 1][idx]
    returns = returns_all[idx]

    score_mu = np.zeros((n_particles, dim))
    score_sigma = np.zeros((n_particles, dim))
    score_mu[idx] = eps / sigma
    score_sigma[idx] = (eps ** 2 - 1.0) / sigma

    baselines = np.zeros(n_particles)
    grad_mu = np.zeros((n_particles, dim))
    grad_sigma = np.zeros((n_particles, dim))
    log_mixture = None
    weights = None
    if biw:
        b, g_mu, g_sigma, log_z, w = _biw_terms(x, mu, sigma, returns, service)
        log_mixture = np.full(n_particles, -np.inf)
        log_mixture[idx] = log_z
        if w is not None:
            weights = np.zeros((n_particles, n_particles))
            weights[np.ix_(idx, idx)] = w
    else:
        b = loo_baseline(returns)
        adv = returns - b
        g_mu = adv[:, None] * score_mu[idx]
        g_sigma = adv[:, None] * score_sigma[idx]
    baselines[idx] = b
    grad_mu[idx] = g_mu
    grad_sigma[idx] = g_sigma
    return StepLrTerms(step=step, biw=biw, returns=returns_all, baselines=baselines, score_mu=score_mu,
                       score_sigma=score_sigma, grad_mu=grad_mu, grad_sigma=grad_sigma,
                       log_mixture=log_mixture, weights=weights)


def baseline_biw(tape: TrajectoryRecord, step: int, particle: int) -> float:
    """Importance-gewichtetes Leave-one-out-Mittel der Rückgaben für Partikel i.

    Berechnet nur die Gewichtszeile i; die Mischungsdichte je Ziel läuft blockweise.
    """
    _check_step(tape, step)
    if not 0 <= particle < tape.n_particles:
        raise ContractViolation(f"Partikel {particle} außerhalb von [0, {tape.n_particles})")
    idx = np.flatnonzero(tape.alive[step])
    pos = np.searchsorted(idx, particle)
    if pos >= idx.size or idx[pos] != particle or idx.size < 2:
        return 0.0
    x = tape.states[step][idx]
    mu = tape.mu[step - 1][idx]
    sigma = tape.sigma[step - 1][idx]
    returns = tape.returns_to_go()[step][idx]
    _, targets_ok, safe_log_z = _log_mixture(x, mu, sigma, LoggerService("LikelihoodRatio"))
    lp, _ = _log_density_block(x, mu[pos:pos + 1], sigma[pos:pos + 1])
    w = np.where(targets_ok, np.exp(lp[0] - safe_log_z), 0.0)
    w[pos] = 0.0
    denom = w.sum()
    if not denom > 0:
        return float(loo_baseline(returns)[pos])
    return float(w @ returns / denom)
