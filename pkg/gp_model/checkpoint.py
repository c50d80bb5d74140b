import logging
from typing import Any, Dict

import numpy as np

from core.errors import ContractViolation
from core.json_io import export_json_file, import_json_file
from gp_model.gp_model import GpModel
from gp_model.kernel import GpHyperparams

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "gp_model"


def model_to_dict(model: GpModel) -> Dict[str, Any]:
    return {
        "kind": CHECKPOINT_KIND,
        "inputs": model.inputs.tolist(),
        "targets": model.targets.tolist(),
        "hyperparams": [h.to_dict() for h in model.hyperparams],
        "jitter": model.jitter,
    }


def model_from_dict(data: Dict[str, Any]) -> GpModel:
    if data.get("kind") != CHECKPOINT_KIND:
        error_msg = f"Kein GP-Checkpoint (kind={data.get('kind')!r})"
        logger.error(error_msg)
        raise ContractViolation(error_msg)
    hyperparams = [GpHyperparams.from_dict(h) for h in data["hyperparams"]]
    jitter = data.get("jitter") or []
    model = GpModel(np.asarray(data["inputs"], dtype=float), np.asarray(data["targets"], dtype=float),
                    hyperparams)
    if jitter and model.jitter != [float(j) for j in jitter]:
        logger.warning(f"Jitter nach dem Laden weicht ab: {model.jitter} statt {jitter}")
    return model


def save_model(model: GpModel, file_path: str) -> None:
    export_json_file(file_path, model_to_dict(model))
    logger.info(f"GP-Modell gespeichert: {file_path}")


def load_model(file_path: str) -> GpModel:
    return model_from_dict(import_json_file(file_path))
