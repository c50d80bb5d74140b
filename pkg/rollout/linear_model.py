from typing import Optional

import numpy as np

from core.errors import ContractViolation
from gp_model.gp_model import ModelPrediction


class LinearGaussianModel:
    """x_{t+1} = x_t + A x_t + B u_t + sigma * eps; erfüllt dieselbe Schnittstelle wie GpModel."""

    def __init__(self, a_matrix, b_matrix, noise_std, latent_std=None):
        self.a_matrix = np.atleast_2d(np.asarray(a_matrix, dtype=float))
        self.b_matrix = np.atleast_2d(np.asarray(b_matrix, dtype=float))
        dim = self.a_matrix.shape[0]
        self.noise_std = np.broadcast_to(np.asarray(noise_std, dtype=float), (dim,)).copy()
        # Optionaler konstanter Modellunsicherheitsanteil (var_f), Standard 0
        latent = 0.0 if latent_std is None else latent_std
        self.latent_std = np.broadcast_to(np.asarray(latent, dtype=float), (dim,)).copy()
        if self.b_matrix.shape[0] != dim or self.a_matrix.shape != (dim, dim):
            raise ContractViolation("A muss D x D und B muss D x F sein")

    @property
    def state_dim(self) -> int:
        return int(self.a_matrix.shape[0])

    @property
    def action_dim(self) -> int:
        return int(self.b_matrix.shape[1])

    @property
    def input_dim(self) -> int:
        return self.state_dim + self.action_dim

    def predict_batch(self, inputs: np.ndarray, with_grads: bool = False) -> ModelPrediction:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        n_batch = inputs.shape[0]
        jac = np.hstack([self.a_matrix, self.b_matrix])
        mean = inputs @ jac.T
        var_f = np.broadcast_to(self.latent_std ** 2, (n_batch, self.state_dim)).copy()
        dmean: Optional[np.ndarray] = None
        dvar_f: Optional[np.ndarray] = None
        if with_grads:
            dmean = np.broadcast_to(jac, (n_batch,) + jac.shape).copy()
            dvar_f = np.zeros_like(dmean)
        return ModelPrediction(mean=mean, var_f=var_f, var_n=self.noise_std ** 2, dmean=dmean, dvar_f=dvar_f)
