# GP-Dynamikmodell: Kern, Vorhersage, Training, Checkpoints
import logging

logger = logging.getLogger(__name__)

from .checkpoint import load_model, model_from_dict, model_to_dict, save_model
from .dataset import build_dataset
from .gp_model import (GpModel, GpPrediction, GramFactor, ModelPrediction, VARIANCE_FLOOR, factorize_gram,
                       gp_predict, gp_predict_grads, nlml, nlml_and_grad)
from .kernel import GpHyperparams, kernel_eval, kernel_matrix, scaled_sq_dists
from .training import TrainingSettings, fit_model, initial_hyperparams, train_hyperparams

__all__ = [
    "load_model", "model_from_dict", "model_to_dict", "save_model",
    "build_dataset",
    "GpModel", "GpPrediction", "GramFactor", "ModelPrediction", "VARIANCE_FLOOR", "factorize_gram",
    "gp_predict", "gp_predict_grads", "nlml", "nlml_and_grad",
    "GpHyperparams", "kernel_eval", "kernel_matrix", "scaled_sq_dists",
    "TrainingSettings", "fit_model", "initial_hyperparams", "train_hyperparams",
]
