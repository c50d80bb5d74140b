"""Training der GP-Hyperparameter durch Minimierung der negativen log-Randlikelihood."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from core.errors import ContractViolation, IllConditionedError
from core.logger_service import LoggerService
from gp_model.gp_model import GpModel, nlml_and_grad
from gp_model.kernel import GpHyperparams

logger = logging.getLogger(__name__)

_LOG_E = 1.0


@dataclass(frozen=True)
class TrainingSettings:
    restarts: int = 3
    max_iter: int = 300
    # Grenzen relativ zur Initialisierung (Faktor) bzw. zur Zielstreuung
    range_factor: float = 1e3
    noise_floor_rel: float = 1e-6
    noise_floor_abs: float = 1e-9
    seed: int = 0


def _target_std(targets: np.ndarray) -> float:
    std = float(np.std(targets))
    return std if std > 0 else 1.0


def initial_hyperparams(inputs: np.ndarray, targets: np.ndarray) -> List[GpHyperparams]:
    """Startwerte: l = Streuung der Eingaben, s = Streuung der Ziele, sigma_n = 0.1 s."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    input_std = np.std(inputs, axis=0)
    input_std = np.where(input_std > 0, input_std, 1.0)
    result = []
    for a in range(targets.shape[1]):
        s = _target_std(targets[:, a])
        result.append(GpHyperparams.from_natural(s, input_std, 0.1 * s))
    return result


def _log_bounds(init: GpHyperparams, target_std: float, settings: TrainingSettings) -> List[Tuple[float, float]]:
    span = float(np.log(settings.range_factor))
    bounds = [(init.log_signal_std - span, init.log_signal_std + span)]
    bounds += [(v - span, v + span) for v in init.log_lengthscales]
    noise_floor = max(settings.noise_floor_rel * target_std, settings.noise_floor_abs)
    bounds.append((float(np.log(noise_floor)), init.log_signal_std + span))
    return bounds


def _objective(inputs: np.ndarray, targets: np.ndarray):
    def fun(vector: np.ndarray) -> Tuple[float, np.ndarray]:
        try:
            value, grad = nlml_and_grad(inputs, targets, GpHyperparams.from_vector(vector))
        except (IllConditionedError, ContractViolation):
            return np.inf, np.zeros_like(vector)
        return value, grad
    return fun


def _train_dimension(inputs: np.ndarray, targets: np.ndarray, init: GpHyperparams,
                     settings: TrainingSettings, rng: np.random.Generator,
                     service: LoggerService) -> Tuple[GpHyperparams, float]:
    bounds = _log_bounds(init, _target_std(targets), settings)
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    fun = _objective(inputs, targets)
    best_vector: Optional[np.ndarray] = None
    best_value = np.inf
    for restart in range(settings.restarts):
        x0 = init.to_vector()
        if restart > 0:
            # Störung um Faktor e bzw. 1/e je Hyperparameter
            x0 = x0 + _LOG_E * rng.choice([-1.0, 1.0], size=x0.size)
        x0 = np.clip(x0, lower, upper)
        try:
            res = minimize(fun, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                           options={"maxiter": settings.max_iter})
        except (FloatingPointError, ValueError) as e:
            service.debug(f"Neustart {restart} abgebrochen: {e}")
            continue
        value = float(res.fun)
        service.debug(f"Neustart {restart}: nlml={value:.6f} ({res.message})")
        if np.isfinite(value) and np.all(np.isfinite(res.x)) and value < best_value:
            best_value = value
            best_vector = np.asarray(res.x, dtype=float)
    if best_vector is None:
        service.flag("gp_restarts_diverged", "Alle Neustarts divergiert, Initialisierung beibehalten")
        return init, np.inf
    return GpHyperparams.from_vector(best_vector), best_value


def train_hyperparams(model: GpModel, restarts: int = 3,
                      settings: Optional[TrainingSettings] = None) -> GpModel:
    """Trainiert jede Ausgabedimension separat und liefert ein neues GpModel."""
    settings = settings or TrainingSettings()
    if restarts < 1:
        raise ContractViolation(f"restarts muss mindestens 1 sein, erhalten: {restarts}")
    if model.n_points < 1:
        raise ContractViolation("Trainingsdaten sind leer")
    settings = TrainingSettings(restarts=restarts, max_iter=settings.max_iter,
                                range_factor=settings.range_factor,
                                noise_floor_rel=settings.noise_floor_rel,
                                noise_floor_abs=settings.noise_floor_abs, seed=settings.seed)
    service = LoggerService("GpTraining")
    rng = np.random.default_rng(settings.seed)
    inits = initial_hyperparams(model.inputs, model.targets)
    trained = []
    for a, init in enumerate(inits):
        h, value = _train_dimension(model.inputs, model.targets[:, a], init, settings, rng, service)
        service.info(f"Dimension {a}: nlml={value:.4f}, s={h.signal_std:.4g}, sigma_n={h.noise_std:.4g}")
        trained.append(h)
    return model.with_hyperparams(trained)


def fit_model(inputs: np.ndarray, targets: np.ndarray, restarts: int = 3,
              settings: Optional[TrainingSettings] = None) -> GpModel:
    """Baut ein Modell mit Start-Hyperparametern und trainiert es."""
    model = GpModel(inputs, targets, initial_hyperparams(inputs, targets))
    return train_hyperparams(model, restarts, settings)
