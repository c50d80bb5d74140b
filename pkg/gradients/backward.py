"""Rückwärtspass über ein Rollout-Band: RP, RP durch Gauß-Resampling, LR und Total Propagation.

Alle Schätzer teilen sich denselben Rückwärtspass. Pro Zeitschritt s wird
der Gradient nach zeta_s = (mu, sigma) gebildet, über du_{s-1}/dtheta in den
Parameterraum projiziert und an Schritt s-1 weitergereicht. RP entspricht
k_LR = 0 in jedem Schritt, Total Propagation wählt k_LR per inverser
Varianzgewichtung.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from core.errors import ContractViolation
from core.logger_service import LoggerService
from gradients.cholesky import chol_vjp
from gradients.estimate import GradEstimate, KRecord
from gradients.lr_terms import lr_step_terms
from gradients.variance import SampleVariance
from rollout.resample import ResampleRecord
from rollout.tape import TrajectoryRecord

logger = logging.getLogger(__name__)


def inverse_variance_weight(var_rp: float, var_lr: float, service: Optional[LoggerService] = None) -> float:
    """k_LR = 1 / (1 + var_lr / var_rp), mit Konventionen für 0 und Unendlich."""
    service = service or LoggerService("TotalPropagation")
    rp_ok, lr_ok = bool(np.isfinite(var_rp)), bool(np.isfinite(var_lr))
    if not rp_ok and not lr_ok:
        service.flag("k_lr_convention", "Beide Varianzen nicht endlich, k_LR = 0.5")
        return 0.5
    if not rp_ok:
        return 1.0
    if not lr_ok:
        return 0.0
    if var_rp <= 0.0 and var_lr <= 0.0:
        service.flag("k_lr_convention", "Beide Varianzen 0, k_LR = 0.5")
        return 0.5
    return float(var_rp / (var_rp + var_lr))


def _mix(k: float, lr_term: np.ndarray, rp_term: np.ndarray) -> np.ndarray:
    if k == 1.0:
        return lr_term.copy()
    if k == 0.0:
        return rp_term.copy()
    return k * lr_term + (1.0 - k) * rp_term


def _project(tape: TrajectoryRecord, t: int, g_mu: np.ndarray, g_sigma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient nach zeta_{t+1} -> Gradient nach u_t (P, F) und nach theta (P, |theta|)."""
    v = np.einsum('pd,pdf->pf', g_mu, tape.dmu_du[t]) + np.einsum('pd,pdf->pf', g_sigma, tape.dsigma_du[t])
    return v, np.einsum('pf,pfn->pn', v, tape.du_dtheta[t])


def _input_adjoint(tape: TrajectoryRecord, t: int, g_mu: np.ndarray, g_sigma: np.ndarray,
                   v: np.ndarray) -> np.ndarray:
    """Totaler Gradient nach dem Eingangszustand inputs[t] (inkl. Pfad über die Policy)."""
    return (np.einsum('pd,pde->pe', g_mu, tape.dmu_dx[t]) + np.einsum('pd,pde->pe', g_sigma, tape.dsigma_dx[t])
            + np.einsum('pf,pfe->pe', v, tape.du_dx[t]))


def gr_backward(record: ResampleRecord, states: np.ndarray, adjoint: np.ndarray) -> np.ndarray:
    """Gradient nach den Zuständen vor dem Resampling aus dem Gradienten nach x' = mu + L z."""
    mask = record.mask
    result = adjoint.copy()
    active = adjoint[mask]
    n_active = active.shape[0]
    if n_active == 0:
        return result
    mean_bar = active.sum(axis=0)
    chol_bar = np.tril(active.T @ record.draws[mask])
    cov_bar = chol_vjp(record.chol, chol_bar)
    centered = states[mask] - record.mean
    result[mask] = mean_bar / n_active + 2.0 * centered @ cov_bar / max(n_active - 1, 1)
    return result


def _backward(tape: TrajectoryRecord, tag: str, fuse: bool, biw: bool = True,
              strategy: Optional[SampleVariance] = None) -> GradEstimate:
    service = LoggerService("Backward")
    strategy = strategy or SampleVariance()
    contributions = np.zeros((tape.n_particles, tape.n_params))
    k_trace = []
    g_mu = g_sigma = v = None
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(tape.horizon, 0, -1):
            adjoint = tape.cost_grads[s].copy()
            if s < tape.horizon:
                link = _input_adjoint(tape, s, g_mu, g_sigma, v)
                record = tape.resamples[s] if s < len(tape.resamples) else None
                if record is not None:
                    link = gr_backward(record, tape.states[s], link)
                adjoint = adjoint + link
            rp_mu, rp_sigma = adjoint, adjoint * tape.eps[s - 1]
            v_rp, theta_rp = _project(tape, s - 1, rp_mu, rp_sigma)
            if not fuse:
                contributions += theta_rp
                g_mu, g_sigma, v = rp_mu, rp_sigma, v_rp
                continue
            terms = lr_step_terms(tape, s, biw)
            v_lr, theta_lr = _project(tape, s - 1, terms.grad_mu, terms.grad_sigma)
            var_rp, var_lr = strategy.traces(s, theta_rp, theta_lr)
            k = inverse_variance_weight(var_rp, var_lr, service)
            k_trace.append(KRecord(step=s, k_lr=k, var_rp=var_rp, var_lr=var_lr))
            contributions += _mix(k, theta_lr, theta_rp)
            g_mu = _mix(k, terms.grad_mu, rp_mu)
            g_sigma = _mix(k, terms.grad_sigma, rp_sigma)
            v = _mix(k, v_lr, v_rp)
    k_trace.reverse()
    return GradEstimate.from_contributions(contributions, tag, k_trace)


def rp_gradient(tape: TrajectoryRecord, tag: str = "rp") -> GradEstimate:
    """Pfadweiser Gradient mit dx/dmu = I und dx/dsigma = diag(eps)."""
    if tape.has_resampling:
        raise ContractViolation("rp_gradient erwartet ein Band ohne Resampling, gr_rp_gradient verwenden")
    return _backward(tape, tag, fuse=False)


def gr_rp_gradient(tape: TrajectoryRecord, tag: str = "gr") -> GradEstimate:
    """RP-Gradient durch Mittelwert, Kovarianz und Cholesky-Faktor des Gauß-Resamplings."""
    if not tape.config.resamples:
        raise ContractViolation("gr_rp_gradient erwartet ein Band im Modus gaussian_resample")
    return _backward(tape, tag, fuse=False)


def lr_gradient(tape: TrajectoryRecord, biw: bool = False, tag: Optional[str] = None) -> GradEstimate:
    """Summe der LR-Terme aller Zeitschritte; keine Ableitung durch die Zustände."""
    if tape.n_particles < 2:
        raise ContractViolation("LR-Gradienten benötigen mindestens 2 Partikel")
    contributions = np.zeros((tape.n_particles, tape.n_params))
    for s in range(1, tape.horizon + 1):
        terms = lr_step_terms(tape, s, biw)
        _, theta_lr = _project(tape, s - 1, terms.grad_mu, terms.grad_sigma)
        contributions += theta_lr
    return GradEstimate.from_contributions(contributions, tag or ("biw-lr" if biw else "lr"))


def total_propagation(tape: TrajectoryRecord, biw: bool = True, strategy: Optional[SampleVariance] = None,
                      tag: str = "tp") -> GradEstimate:
    if tape.n_particles < 2:
        raise ContractViolation("Total Propagation benötigt mindestens 2 Partikel")
    if tape.has_resampling:
        raise ContractViolation("Total Propagation erwartet ein Band ohne Resampling")
    return _backward(tape, tag, fuse=True, biw=biw, strategy=strategy)
