# Deterministische Regler (RBF-Netz, linear) mit exakten Jacobi-Matrizen
import logging

logger = logging.getLogger(__name__)

from .checkpoint import load_policy, policy_from_dict, policy_to_dict, save_policy
from .input_map import PolicyInputMap
from .params import (POLICY_KINDS, PolicyEnvInfo, PolicyParams, frozen_mask, make_policy, policy_eval,
                     policy_init, policy_jacobians)
from .policies import LinearPolicy, Policy, RbfPolicy

__all__ = [
    "load_policy", "policy_from_dict", "policy_to_dict", "save_policy",
    "PolicyInputMap",
    "POLICY_KINDS", "PolicyEnvInfo", "PolicyParams", "frozen_mask", "make_policy", "policy_eval",
    "policy_init", "policy_jacobians",
    "LinearPolicy", "Policy", "RbfPolicy",
]
