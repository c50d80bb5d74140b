import logging

from core.flags import FlagSeverity, raise_flag


class LoggerService:
    """Zentrale Klasse für alle Logging-Funktionen einer Komponente."""

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"pipps.{name}")

    def info(self, message: str) -> None:
        self.logger.info(message)

    def debug(self, message: str) -> None:
        self.logger.debug(message)

    def warning(self, message: str) -> None:
        self.logger.warning(message)

    def error(self, message: str, exc_info: bool = False) -> None:
        self.logger.error(message, exc_info=exc_info)

    def flag(self, code: str, message: str, failure: bool = False) -> None:
        """Meldet ein numerisches Ereignis an die Flag-Registry."""
        severity = FlagSeverity.FAILURE if failure else FlagSeverity.WARNING
        raise_flag(code, f"{self.name}: {message}", severity)
