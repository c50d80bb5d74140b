# Varianz-normierter SGD mit Momentum über die Policy-Parameter
import logging

logger = logging.getLogger(__name__)

from .sgd import OPTLOG_COLUMNS, OptimizerLog, OptState, normalized_increment, sgd_step

__all__ = ["OPTLOG_COLUMNS", "OptimizerLog", "OptState", "normalized_increment", "sgd_step"]
