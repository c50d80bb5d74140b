import logging
from typing import Any, Dict

import numpy as np

from core.errors import ContractViolation
from core.json_io import export_json_file, import_json_file
from policy.input_map import PolicyInputMap
from policy.params import PolicyParams
from policy.policies import LinearPolicy, RbfPolicy

logger = logging.getLogger(__name__)


def policy_to_dict(params: PolicyParams) -> Dict[str, Any]:
    policy = params.policy
    data = {
        "kind": policy.kind,
        "state_dim": policy.state_dim,
        "action_dim": policy.action_dim,
        "angle_dims": list(policy.input_map.angle_dims),
        "u_max": policy.u_max,
        "theta": [float(v) for v in params.theta],
    }
    if isinstance(policy, RbfPolicy):
        data["n_basis"] = policy.n_basis
    return data


def policy_from_dict(data: Dict[str, Any]) -> PolicyParams:
    input_map = PolicyInputMap(int(data["state_dim"]), data.get("angle_dims", ()))
    u_max = data.get("u_max")
    kind = data.get("kind")
    if kind == "rbf":
        policy = RbfPolicy(input_map, int(data["action_dim"]), u_max, int(data["n_basis"]))
    elif kind == "linear":
        policy = LinearPolicy(input_map, int(data["action_dim"]), u_max)
    else:
        error_msg = f"Unbekannter Policy-Typ im Checkpoint: {kind!r}"
        logger.error(error_msg)
        raise ContractViolation(error_msg)
    return PolicyParams(policy, np.asarray(data["theta"], dtype=float))


def save_policy(params: PolicyParams, file_path: str) -> None:
    export_json_file(file_path, policy_to_dict(params))
    logger.info(f"Policy gespeichert: {file_path}")


def load_policy(file_path: str) -> PolicyParams:
    return policy_from_dict(import_json_file(file_path))
