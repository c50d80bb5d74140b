"""Quadratisch-exponentieller Kern ohne Faktor 1/2 im Exponenten.

    k(x, x') = s^2 * exp(-(x - x')^T diag(l^2)^-1 (x - x'))

Eine Längenskala l dieses Kerns entspricht l * sqrt(2) im konventionellen
SE-Kern mit exp(-r^2 / (2 l^2)).
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np

from core.errors import ContractViolation


@dataclass
class GpHyperparams:
    """Hyperparameter einer Ausgabedimension, gespeichert im Log-Raum."""
    log_signal_std: float
    log_lengthscales: np.ndarray
    log_noise_std: float

    def __post_init__(self):
        self.log_lengthscales = np.asarray(self.log_lengthscales, dtype=float).copy()
        values = np.concatenate([[self.log_signal_std, self.log_noise_std], self.log_lengthscales])
        if not np.all(np.isfinite(values)):
            raise ContractViolation(f"Hyperparameter müssen endlich sein: {values}")

    @classmethod
    def from_natural(cls, signal_std: float, lengthscales, noise_std: float) -> "GpHyperparams":
        lengthscales = np.asarray(lengthscales, dtype=float)
        if signal_std <= 0 or noise_std <= 0 or np.any(lengthscales <= 0):
            raise ContractViolation("Hyperparameter müssen strikt positiv sein")
        return cls(float(np.log(signal_std)), np.log(lengthscales), float(np.log(noise_std)))

    @property
    def signal_std(self) -> float:
        return float(np.exp(self.log_signal_std))

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def noise_std(self) -> float:
        return float(np.exp(self.log_noise_std))

    @property
    def input_dim(self) -> int:
        return int(self.log_lengthscales.size)

    def to_vector(self) -> np.ndarray:
        """Reihenfolge: [log s, log l_1..l_E, log sigma_n]."""
        return np.concatenate([[self.log_signal_std], self.log_lengthscales, [self.log_noise_std]])

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "GpHyperparams":
        vector = np.asarray(vector, dtype=float)
        return cls(float(vector[0]), vector[1:-1], float(vector[-1]))

    def to_dict(self) -> Dict[str, object]:
        return {"log_signal_std": float(self.log_signal_std),
                "log_lengthscales": [float(v) for v in self.log_lengthscales],
                "log_noise_std": float(self.log_noise_std)}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "GpHyperparams":
        return cls(float(data["log_signal_std"]), np.asarray(data["log_lengthscales"], dtype=float),
                   float(data["log_noise_std"]))


def _check_dims(x: np.ndarray, x_prime: np.ndarray, h: GpHyperparams) -> None:
    if x.shape[-1] != h.input_dim or x_prime.shape[-1] != h.input_dim:
        raise ContractViolation(
            f"Dimensionen passen nicht: {x.shape[-1]}, {x_prime.shape[-1]} vs. {h.input_dim} Längenskalen")


def kernel_eval(x, x_prime, h: GpHyperparams) -> float:
    """Kernwert für zwei Eingabevektoren; Ergebnis in (0, s^2]."""
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.ndim != 1 or x_prime.ndim != 1:
        raise ContractViolation("kernel_eval erwartet zwei Vektoren")
    _check_dims(x, x_prime, h)
    r = (x - x_prime) / h.lengthscales
    return float(h.signal_std ** 2 * np.exp(-np.dot(r, r)))


def scaled_sq_dists(a: np.ndarray, b: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Paarweise Summe ((a_d - b_d) / l_d)^2, Form (len(a), len(b))."""
    diff = (a[:, None, :] - b[None, :, :]) / lengthscales
    return np.einsum('ijd,ijd->ij', diff, diff)


def kernel_matrix(a: np.ndarray, b: np.ndarray, h: GpHyperparams) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    _check_dims(a, b, h)
    return h.signal_std ** 2 * np.exp(-scaled_sq_dists(a, b, h.lengthscales))

