"""Deterministische, differenzierbare Regler auf einem flachen Parametervektor theta.

Ausgabe u = u_max * sat(pi(z)) mit z = Eingabeabbildung(x). Ist u_max None,
entfällt die Sättigung (für analytisch lösbare Testketten).
"""
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.errors import ContractViolation
from environment.saturation import saturate, saturate_grad
from policy.input_map import PolicyInputMap

logger = logging.getLogger(__name__)


class Policy:
    kind = "base"

    def __init__(self, input_map: PolicyInputMap, action_dim: int, u_max: Optional[float]):
        if action_dim < 1:
            raise ContractViolation(f"action_dim muss >= 1 sein, erhalten: {action_dim}")
        if u_max is not None and not u_max > 0:
            raise ContractViolation(f"u_max muss positiv sein, erhalten: {u_max}")
        self.input_map = input_map
        self.action_dim = int(action_dim)
        self.u_max = u_max

    @property
    def state_dim(self) -> int:
        return self.input_map.state_dim

    @property
    def input_dim(self) -> int:
        return self.input_map.output_dim

    @property
    def param_groups(self) -> Dict[str, slice]:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return max(s.stop for s in self.param_groups.values())

    def freeze_mask(self, frozen: Sequence[str] = ()) -> np.ndarray:
        """Bool-Maske der trainierbaren Koordinaten; eingefrorene Gruppen sind False."""
        unknown = set(frozen) - set(self.param_groups)
        if unknown:
            raise ContractViolation(f"Unbekannte Parametergruppen: {sorted(unknown)}")
        mask = np.ones(self.n_params, dtype=bool)
        for name in frozen:
            mask[self.param_groups[name]] = False
        return mask

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ContractViolation(f"theta der Länge {self.n_params} erwartet, Form {theta.shape}")
        return theta

    def _raw(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _raw_jacobians(self, theta: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _squash(self, raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.u_max is None:
            return raw, np.ones_like(raw)
        return self.u_max * saturate(raw), self.u_max * saturate_grad(raw)

    def evaluate(self, theta, states) -> np.ndarray:
        """Aktionen (P, F) für Zustände (P, D)."""
        theta = self._check_theta(theta)
        u, _ = self._squash(self._raw(theta, self.input_map.apply(states)))
        return u

    def jacobians(self, theta, states) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Liefert u (P, F), du/dx (P, F, D) und du/dtheta (P, F, |theta|)."""
        theta = self._check_theta(theta)
        z = self.input_map.apply(states)
        raw, draw_dz, draw_dtheta = self._raw_jacobians(theta, z)
        u, du_draw = self._squash(raw)
        du_dx = np.einsum('pf,pfi,pid->pfd', du_draw, draw_dz, self.input_map.jacobian(states))
        return u, du_dx, du_draw[:, :, None] * draw_dtheta


class RbfPolicy(Policy):
    """Summe von Gaußglocken: pi(z) = sum_k W_k exp(-1/2 sum_d ((z_d - c_kd) / lambda_d)^2).

    theta = [Zentren (K x D_in, zeilenweise), log lambda (D_in), Gewichte (K x F)].
    """
    kind = "rbf"

    def __init__(self, input_map: PolicyInputMap, action_dim: int, u_max: Optional[float], n_basis: int = 50):
        super().__init__(input_map, action_dim, u_max)
        if n_basis < 1:
            raise ContractViolation(f"n_basis muss >= 1 sein, erhalten: {n_basis}")
        self.n_basis = int(n_basis)

    @property
    def param_groups(self) -> Dict[str, slice]:
        n_centers = self.n_basis * self.input_dim
        n_scales = n_centers + self.input_dim
        return {"centers": slice(0, n_centers),
                "lengthscales": slice(n_centers, n_scales),
                "weights": slice(n_scales, n_scales + self.n_basis * self.action_dim)}

    def unpack(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        groups = self.param_groups
        centers = theta[groups["centers"]].reshape(self.n_basis, self.input_dim)
        lengthscales = np.exp(theta[groups["lengthscales"]])
        weights = theta[groups["weights"]].reshape(self.n_basis, self.action_dim)
        return centers, lengthscales, weights

    def pack(self, centers, lengthscales, weights) -> np.ndarray:
        return np.concatenate([np.ravel(centers), np.log(np.ravel(lengthscales)), np.ravel(weights)])

    def _features(self, theta, z):
        centers, lengthscales, weights = self.unpack(theta)
        scaled = (z[:, None, :] - centers[None, :, :]) / lengthscales
        phi = np.exp(-0.5 * np.sum(scaled ** 2, axis=-1))
        return centers, lengthscales, weights, scaled, phi

    def _raw(self, theta, z):
        *_, weights, _, phi = self._features(theta, z)
        return phi @ weights

    def _raw_jacobians(self, theta, z):
        centers, lengthscales, weights, scaled, phi = self._features(theta, z)
        n_batch = z.shape[0]
        raw = phi @ weights
        # d phi_k / d z_d = -phi_k (z_d - c_kd) / lambda_d^2
        dphi_dz = -phi[:, :, None] * scaled / lengthscales
        draw_dz = np.einsum('kf,pkd->pfd', weights, dphi_dz)
        draw_dc = -np.einsum('kf,pkd->pfkd', weights, dphi_dz)
        draw_dlog = np.einsum('kf,pk,pkd->pfd', weights, phi, scaled ** 2)
        draw_dw = np.zeros((n_batch, self.action_dim, self.n_basis, self.action_dim))
        for f in range(self.action_dim):
            draw_dw[:, f, :, f] = phi
        draw_dtheta = np.concatenate([draw_dc.reshape(n_batch, self.action_dim, -1), draw_dlog,
                                      draw_dw.reshape(n_batch, self.action_dim, -1)], axis=-1)
        return raw, draw_dz, draw_dtheta


class LinearPolicy(Policy):
    """pi(z) = W z + b; theta = [W (F x D_in, zeilenweise), b (F)]."""
    kind = "linear"

    @property
    def param_groups(self) -> Dict[str, slice]:
        n_matrix = self.action_dim * self.input_dim
        return {"matrix": slice(0, n_matrix), "bias": slice(n_matrix, n_matrix + self.action_dim)}

    def unpack(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        groups = self.param_groups
        return theta[groups["matrix"]].reshape(self.action_dim, self.input_dim), theta[groups["bias"]]

    def pack(self, matrix, bias) -> np.ndarray:
        return np.concatenate([np.ravel(matrix), np.ravel(bias)])

    def _raw(self, theta, z):
        matrix, bias = self.unpack(theta)
        return z @ matrix.T + bias

    def _raw_jacobians(self, theta, z):
        matrix, bias = self.unpack(theta)
        n_batch = z.shape[0]
        draw_dz = np.broadcast_to(matrix, (n_batch,) + matrix.shape).copy()
        draw_dmatrix = np.zeros((n_batch, self.action_dim, self.action_dim, self.input_dim))
        for f in range(self.action_dim):
            draw_dmatrix[:, f, f, :] = z
        draw_dbias = np.broadcast_to(np.eye(self.action_dim), (n_batch, self.action_dim, self.action_dim))
        draw_dtheta = np.concatenate([draw_dmatrix.reshape(n_batch, self.action_dim, -1), draw_dbias], axis=-1)
        return z @ matrix.T + bias, draw_dz, draw_dtheta
