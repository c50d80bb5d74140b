"""Registry für numerische Ereignisse (Jitter, Clamping, abgeschnittene Partikel, ...).

Die Ereignisse werden nicht als Ausnahme geworfen, sondern gesammelt, als
Warnung geloggt und in jede Ergebnisdatei geschrieben. Ereignisse mit
Schweregrad FAILURE führen im CLI zum Exit-Code 2.
"""
import logging
import threading
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

logger = logging.getLogger(__name__)


class FlagSeverity(str, Enum):
    WARNING = "warning"
    FAILURE = "failure"


@dataclass(frozen=True)
class NumericFlag:
    code: str
    message: str
    severity: FlagSeverity


class FlagRegistry:
    """Thread-sichere Sammlung aller gemeldeten Flags."""

    def __init__(self):
        self._lock = threading.Lock()
        self._flags: List[NumericFlag] = []

    def raise_flag(self, code: str, message: str, severity: FlagSeverity = FlagSeverity.WARNING) -> NumericFlag:
        flag = NumericFlag(code, message, FlagSeverity(severity))
        with self._lock:
            self._flags.append(flag)
        logger.warning(f"[{flag.severity.value}] {code}: {message}")
        return flag

    def clear(self) -> None:
        with self._lock:
            self._flags.clear()

    def snapshot(self) -> List[NumericFlag]:
        with self._lock:
            return list(self._flags)

    def has_failures(self) -> bool:
        return any(f.severity is FlagSeverity.FAILURE for f in self.snapshot())

    def counts(self) -> Dict[str, int]:
        """Anzahl der Flags pro Code, sortiert für reproduzierbare Ergebnisdateien."""
        counter = Counter(f.code for f in self.snapshot())
        return dict(sorted(counter.items()))

    def summary(self) -> Dict[str, object]:
        return {"counts": self.counts(), "failure": self.has_failures()}


# Prozessweite Standard-Registry
flags = FlagRegistry()


def raise_flag(code: str, message: str, severity: FlagSeverity = FlagSeverity.WARNING) -> NumericFlag:
    return flags.raise_flag(code, message, severity)
