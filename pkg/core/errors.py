"""Ausnahmen des PIPPS-Pakets."""


class PippsError(Exception):
    """Basisklasse aller PIPPS-Fehler."""


class ContractViolation(PippsError, ValueError):
    """Eine Vorbedingung einer Operation ist verletzt."""


class IllConditionedError(PippsError, ArithmeticError):
    """Gram-Matrix bleibt auch mit maximalem Jitter nicht positiv definit."""


class ConfigError(PippsError, ValueError):
    """Konfigurationsdatei fehlt, ist kein gültiges JSON oder enthält ungültige Werte."""
