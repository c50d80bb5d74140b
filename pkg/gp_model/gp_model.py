"""Gauß-Prozess-Regression der Zustandsänderungen, eine GP pro Zustandsdimension."""
import logging
import threading
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from core.errors import ContractViolation, IllConditionedError
from core.logger_service import LoggerService
from gp_model.kernel import GpHyperparams, kernel_matrix

logger = logging.getLogger(__name__)

# Jitter relativ zu s_a^2, eskaliert um Faktor 10
JITTER_START = 1e-8
JITTER_MAX = 1e-4
VARIANCE_FLOOR = 1e-12
_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GramFactor:
    """Zwischengespeicherte Faktorisierung K + sigma_n^2 I + Jitter einer Dimension."""
    chol: np.ndarray
    alpha: np.ndarray
    inverse: np.ndarray
    jitter_ratio: float


@dataclass(frozen=True)
class ModelPrediction:
    """Vorhersage für einen Partikel-Batch.

    mean: (P, D) mittlere Zustandsänderung, var_f: (P, D) Modellunsicherheit,
    var_n: (D,) gelerntes Rauschen, dmean/dvar_f: (P, D, D+F) Eingabe-Jacobis.
    """
    mean: np.ndarray
    var_f: np.ndarray
    var_n: np.ndarray
    dmean: Optional[np.ndarray] = None
    dvar_f: Optional[np.ndarray] = None


@dataclass(frozen=True)
class GpPrediction:
    mean_delta: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    latent_variance: np.ndarray


def factorize_gram(inputs: np.ndarray, targets: np.ndarray, h: GpHyperparams,
                   jitter_start: float = JITTER_START, jitter_max: float = JITTER_MAX) -> GramFactor:
    """Cholesky-Faktorisierung mit eskalierendem Jitter."""
    n_points = inputs.shape[0]
    signal_var = h.signal_std ** 2
    gram = kernel_matrix(inputs, inputs, h) + h.noise_std ** 2 * np.eye(n_points)
    ratio = jitter_start
    while ratio <= jitter_max * (1.0 + 1e-9):
        try:
            chol = cholesky(gram + ratio * signal_var * np.eye(n_points), lower=True)
        except LinAlgError:
            logger.debug(f"Gram-Matrix nicht positiv definit bei Jitter {ratio:g}, eskaliere")
            ratio *= 10.0
            continue
        if ratio > jitter_start:
            LoggerService("GpModel").flag("gp_jitter_escalated", f"Jitter auf {ratio:g} * s^2 erhöht")
        alpha = cho_solve((chol, True), targets)
        inverse = cho_solve((chol, True), np.eye(n_points))
        return GramFactor(chol=chol, alpha=alpha, inverse=inverse, jitter_ratio=ratio)
    error_msg = f"Gram-Matrix bleibt trotz Jitter {jitter_max:g} * s^2 nicht positiv definit"
    logger.error(error_msg)
    raise IllConditionedError(error_msg)


def nlml_and_grad(inputs: np.ndarray, targets: np.ndarray, h: GpHyperparams,
                  jitter_start: float = JITTER_START,
                  jitter_max: float = JITTER_MAX) -> Tuple[float, np.ndarray]:
    """Negative log-Randlikelihood und exakter Gradient nach [log s, log l, log sigma_n]."""
    n_points = inputs.shape[0]
    if n_points < 1:
        raise ContractViolation("nlml benötigt mindestens einen Trainingspunkt")
    factor = factorize_gram(inputs, targets, h, jitter_start, jitter_max)
    signal_var = h.signal_std ** 2
    noise_var = h.noise_std ** 2

    scaled = (inputs[:, None, :] - inputs[None, :, :]) / h.lengthscales
    sq_per_dim = scaled ** 2
    k_f = signal_var * np.exp(-sq_per_dim.sum(axis=-1))

    value = (0.5 * float(targets @ factor.alpha) + float(np.sum(np.log(np.diag(factor.chol))))
             + 0.5 * n_points * _LOG_2PI)

    w = factor.inverse - np.outer(factor.alpha, factor.alpha)
    jitter = factor.jitter_ratio * signal_var
    grad = np.empty(h.input_dim + 2)
    grad[0] = float(np.sum(w * k_f) + jitter * np.trace(w))
    grad[1:-1] = np.einsum('nm,nm,nmd->d', w, k_f, sq_per_dim)
    grad[-1] = noise_var * float(np.trace(w))
    return value, grad


class GpModel:
    """Ein GP pro Ausgabedimension auf Eingaben [x, u] und Zielen Delta x.

    Nach dem Training ist das Modell unveränderlich; Vorhersagen greifen nur
    lesend auf die zwischengespeicherten Faktorisierungen zu.
    """

    def __init__(self, inputs: np.ndarray, targets: np.ndarray, hyperparams: Sequence[GpHyperparams],
                 jitter_start: float = JITTER_START, jitter_max: float = JITTER_MAX):
        self.logger = LoggerService("GpModel")
        self.jitter_start = jitter_start
        self.jitter_max = jitter_max
        self._lock = threading.Lock()
        self._factors: Optional[List[GramFactor]] = None
        self.factorization_count = 0
        self._inputs, self._targets = self._validate_data(inputs, targets)
        self._hyperparams = self._validate_hyperparams(hyperparams)
        self._build_factorizations()

    def _validate_data(self, inputs, targets) -> Tuple[np.ndarray, np.ndarray]:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float)).copy()
        targets = np.asarray(targets, dtype=float).copy()
        if targets.ndim == 1:
            targets = targets[:, None]
        if inputs.shape[0] < 1:
            raise ContractViolation("Trainingsdaten sind leer")
        if inputs.shape[0] != targets.shape[0]:
            error_msg = f"Anzahl Eingaben ({inputs.shape[0]}) und Ziele ({targets.shape[0]}) verschieden"
            self.logger.error(error_msg)
            raise ContractViolation(error_msg)
        if inputs.shape[1] < targets.shape[1]:
            raise ContractViolation("Eingaben müssen mindestens die Zustandsdimensionen enthalten")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise ContractViolation("Trainingsdaten enthalten nicht-endliche Werte")
        return inputs, targets

    def _validate_hyperparams(self, hyperparams: Sequence[GpHyperparams]) -> List[GpHyperparams]:
        hyperparams = list(hyperparams)
        if len(hyperparams) != self.state_dim:
            raise ContractViolation(f"{self.state_dim} Hyperparameter-Sätze erwartet, {len(hyperparams)} erhalten")
        for h in hyperparams:
            if h.input_dim != self.input_dim:
                raise ContractViolation(f"Hyperparameter für {h.input_dim} statt {self.input_dim} Eingaben")
        return hyperparams

    def _build_factorizations(self) -> None:
        """Faktorisiert alle Gram-Matrizen (einmal pro Datensatz/Hyperparameter-Stand)."""
        with self._lock:
            if self._factors is not None:
                return
            self._factors = [factorize_gram(self._inputs, self._targets[:, a], h, self.jitter_start,
                                            self.jitter_max)
                             for a, h in enumerate(self._hyperparams)]
            self.factorization_count += len(self._factors)
            self.logger.debug(f"{len(self._factors)} Gram-Matrizen faktorisiert (N={self.n_points})")

    def _invalidate(self) -> None:
        with self._lock:
            self._factors = None

    @property
    def inputs(self) -> np.ndarray:
        return self._inputs

    @property
    def targets(self) -> np.ndarray:
        return self._targets

    @property
    def hyperparams(self) -> List[GpHyperparams]:
        return list(self._hyperparams)

    @property
    def state_dim(self) -> int:
        return int(self._targets.shape[1])

    @property
    def input_dim(self) -> int:
        return int(self._inputs.shape[1])

    @property
    def action_dim(self) -> int:
        return self.input_dim - self.state_dim

    @property
    def n_points(self) -> int:
        return int(self._inputs.shape[0])

    @property
    def jitter(self) -> List[float]:
        return [f.jitter_ratio for f in self.factors()]

    def factors(self) -> List[GramFactor]:
        if self._factors is None:
            self._build_factorizations()
        return self._factors

    def set_data(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        self._inputs, self._targets = self._validate_data(inputs, targets)
        self._invalidate()
        self._build_factorizations()

    def set_hyperparams(self, hyperparams: Sequence[GpHyperparams]) -> None:
        self._hyperparams = self._validate_hyperparams(hyperparams)
        self._invalidate()
        self._build_factorizations()

    def with_hyperparams(self, hyperparams: Sequence[GpHyperparams]) -> "GpModel":
        return GpModel(self._inputs, self._targets, hyperparams, self.jitter_start, self.jitter_max)

    def nlml(self, dim: int) -> Tuple[float, np.ndarray]:
        return nlml_and_grad(self._inputs, self._targets[:, dim], self._hyperparams[dim],
                             self.jitter_start, self.jitter_max)

    def predict_batch(self, inputs: np.ndarray, with_grads: bool = False) -> ModelPrediction:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if inputs.shape[1] != self.input_dim:
            raise ContractViolation(f"Eingabedimension {inputs.shape[1]} statt {self.input_dim}")
        n_batch = inputs.shape[0]
        mean = np.empty((n_batch, self.state_dim))
        var_f = np.empty((n_batch, self.state_dim))
        var_n = np.array([h.noise_std ** 2 for h in self._hyperparams])
        dmean = np.empty((n_batch, self.state_dim, self.input_dim)) if with_grads else None
        dvar_f = np.empty((n_batch, self.state_dim, self.input_dim)) if with_grads else None
        for a, (h, factor) in enumerate(zip(self._hyperparams, self.factors())):
            k_star = kernel_matrix(inputs, self._inputs, h)
            k_inv = k_star @ factor.inverse
            mean[:, a] = k_star @ factor.alpha
            raw = h.signal_std ** 2 - np.einsum('pn,pn->p', k_inv, k_star)
            clamped = raw < 0.0
            var_f[:, a] = np.where(clamped, 0.0, raw)
            if with_grads:
                inv_l2 = 1.0 / h.lengthscales ** 2
                weighted = k_star * factor.alpha
                dmean[:, a, :] = -2.0 * inv_l2 * (inputs * mean[:, a:a + 1] - weighted @ self._inputs)
                b = k_inv * k_star
                dvar_f[:, a, :] = 4.0 * inv_l2 * (inputs * b.sum(axis=1, keepdims=True) - b @ self._inputs)
                dvar_f[clamped, a, :] = 0.0
        return ModelPrediction(mean=mean, var_f=var_f, var_n=var_n, dmean=dmean, dvar_f=dvar_f)


def _as_input_vector(model: GpModel, x_tilde) -> np.ndarray:
    x_tilde = np.asarray(x_tilde, dtype=float)
    if x_tilde.ndim != 1 or x_tilde.size != model.input_dim:
        raise ContractViolation(f"Eingabevektor der Länge {model.input_dim} erwartet, Form {x_tilde.shape}")
    return x_tilde


def gp_predict(model: GpModel, x_tilde) -> GpPrediction:
    """Vorhersage an einem Punkt [x, u]; der Mittelwert der Änderung wird zu x addiert."""
    x_tilde = _as_input_vector(model, x_tilde)
    pred = model.predict_batch(x_tilde[None, :])
    mean_delta = pred.mean[0]
    latent = pred.var_f[0]
    return GpPrediction(mean_delta=mean_delta, mean=x_tilde[:model.state_dim] + mean_delta,
                        variance=latent + pred.var_n, latent_variance=latent)


def gp_predict_grads(model: GpModel, x_tilde) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobi-Matrizen (D x (D+F)) der mittleren Änderung und der Standardabweichung.

    Die Jacobi-Matrix des nächsten Zustandsmittels ergibt sich durch Addition
    der Einheitsmatrix auf dem Zustandsblock.
    """
    x_tilde = _as_input_vector(model, x_tilde)
    pred = model.predict_batch(x_tilde[None, :], with_grads=True)
    total = pred.var_f[0] + pred.var_n
    if np.any(total < VARIANCE_FLOOR):
        model.logger.flag("variance_floor", "Prädiktive Varianz unter Untergrenze, geklemmt")
    std = np.sqrt(np.maximum(total, VARIANCE_FLOOR))
    dstd = np.where((total >= VARIANCE_FLOOR)[:, None], pred.dvar_f[0] / (2.0 * std[:, None]), 0.0)
    return pred.dmean[0], dstd


def nlml(model: GpModel, dim: int) -> Tuple[float, np.ndarray]:
    return model.nlml(dim)
