# Gradientenschätzer über Rollout-Bänder: RP, GR-RP, LR, BIW-LR, Total Propagation
import logging

logger = logging.getLogger(__name__)

from .backward import (gr_backward, gr_rp_gradient, inverse_variance_weight, lr_gradient, rp_gradient,
                       total_propagation)
from .cholesky import chol_jvp, chol_vjp, phi
from .estimate import K_TRACE_COLUMNS, GradEstimate, KRecord
from .lr_terms import StepLrTerms, baseline_biw, loo_baseline, lr_step_terms
from .registry import ESTIMATORS, EstimatorSpec, estimate_gradient, estimator_rollout_config, get_estimator
from .variance import (VARIANCE_STRATEGIES, MovingAverageVariance, SampleVariance, SubsetVariance,
                       make_strategy)

__all__ = [
    "gr_backward", "gr_rp_gradient", "inverse_variance_weight", "lr_gradient", "rp_gradient", "total_propagation",
    "chol_jvp", "chol_vjp", "phi",
    "K_TRACE_COLUMNS", "GradEstimate", "KRecord",
    "StepLrTerms", "baseline_biw", "loo_baseline", "lr_step_terms",
    "ESTIMATORS", "EstimatorSpec", "estimate_gradient", "estimator_rollout_config", "get_estimator",
    "VARIANCE_STRATEGIES", "MovingAverageVariance", "SampleVariance", "SubsetVariance", "make_strategy",
]
