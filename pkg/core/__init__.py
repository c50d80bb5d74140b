# Gemeinsame Infrastruktur: Logging, Fehler, Flags, JSON-Dateien, Zufallsströme
import logging

logger = logging.getLogger(__name__)

from .errors import ConfigError, ContractViolation, IllConditionedError, PippsError
from .flags import FlagRegistry, FlagSeverity, NumericFlag, flags, raise_flag
from .json_io import export_json_file, import_json_file
from .logger_service import LoggerService
from .streams import ParticleStreams, StreamTag, derive_seed

__all__ = [
    "ConfigError", "ContractViolation", "IllConditionedError", "PippsError",
    "FlagRegistry", "FlagSeverity", "NumericFlag", "flags", "raise_flag",
    "export_json_file", "import_json_file",
    "LoggerService",
    "ParticleStreams", "StreamTag", "derive_seed",
]
