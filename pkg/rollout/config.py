from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict

from core.errors import ConfigError


class RolloutMode(str, Enum):
    PLAIN = "plain"
    FIXED_SEED = "fixed_seed"
    GAUSSIAN_RESAMPLE = "gaussian_resample"


@dataclass(frozen=True)
class RolloutConfig:
    """Partikelzahl, Horizont, Modus und Ablationen einer Partikel-Vorhersage.

    fixed_seed=True hält in jedem Modus alle Zufallsziehungen über die
    Aufrufe hinweg fest (für gaussian_resample die einzige Möglichkeit,
    den Seed zu fixieren).
    """
    n_particles: int = 300
    horizon: int = 30
    mode: RolloutMode = RolloutMode.PLAIN
    fixed_seed: bool = False
    drop_model_uncertainty: bool = False
    noise_variance_multiplier: float = 1.0
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "mode", RolloutMode(self.mode))
        if self.n_particles < 1 or self.horizon < 0:
            raise ConfigError(f"Ungültige Rollout-Größen: P={self.n_particles}, T={self.horizon}")
        if self.noise_variance_multiplier < 0:
            raise ConfigError(f"noise_variance_multiplier muss >= 0 sein: {self.noise_variance_multiplier}")

    @property
    def seed_is_fixed(self) -> bool:
        return self.mode is RolloutMode.FIXED_SEED or self.fixed_seed

    @property
    def resamples(self) -> bool:
        return self.mode is RolloutMode.GAUSSIAN_RESAMPLE

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mode"] = self.mode.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RolloutConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unbekannte Rollout-Schlüssel: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Ungültige Rollout-Konfiguration: {e}") from e
