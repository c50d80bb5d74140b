"""Experimentkonfiguration als Baum von Dataclasses, gelesen aus JSON."""
import dataclasses
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Type, TypeVar

import numpy as np

from core.errors import ConfigError
from core.json_io import import_json_file
from core.streams import StreamTag, derive_seed
from environment.cartpole import ANGLE_DIMS, CartPoleParams
from environment.costs import CostConfig, CostVariant
from environment.initial_state import GaussianInitialState
from environment.noise import NoiseConfig
from gp_model.training import TrainingSettings
from gradients.registry import ESTIMATORS
from gradients.variance import VARIANCE_STRATEGIES
from policy.params import POLICY_KINDS, PolicyEnvInfo
from rollout.config import RolloutConfig, RolloutMode

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class EnvironmentSettings:
    cart_mass: float = 0.5
    pole_mass: float = 0.5
    pole_length: float = 0.6
    friction: float = 0.1
    gravity: float = 9.82
    u_max: float = 10.0
    control_period: float = 0.1
    substeps: int = 5
    noise_multiplier: float = 1.0
    initial_mean: List[float] = field(default_factory=lambda: [0.0, float(np.pi), 0.0, 0.0])
    initial_std: List[float] = field(default_factory=lambda: [0.1, 0.1, 0.1, 0.1])
    cost: str = CostVariant.ANGLE.value
    tip_lengthscale: float = 0.25


@dataclass
class GpSettings:
    restarts: int = 3
    max_iter: int = 300


@dataclass
class PolicySettings:
    kind: str = "rbf"
    n_basis: int = 50
    frozen: List[str] = field(default_factory=list)


@dataclass
class RolloutSettings:
    n_particles: int = 300
    horizon: int = 30
    mode: str = RolloutMode.PLAIN.value
    fixed_seed: bool = False
    drop_model_uncertainty: bool = False
    noise_variance_multiplier: float = 1.0


@dataclass
class EstimatorSettings:
    tag: str = "tp"
    tp_biw: bool = True
    variance_strategy: str = "sample"
    ema_decay: float = 0.9
    subset: List[int] = field(default_factory=list)


@dataclass
class OptimizerSettings:
    learning_rate: float = 5e-4
    momentum: float = 0.9
    delta: float = 1e-12


@dataclass
class TrialSettings:
    random_trials: int = 1
    learned_trials: int = 15
    evals_per_trial: int = 600
    eval_repeats: int = 30
    success_threshold: float = 0.2


@dataclass
class LandscapeSettings:
    n_particles: int = 100
    grid_points: int = 31
    half_width: float = 0.5
    estimators: List[str] = field(default_factory=lambda: ["rp", "lr", "biw-lr", "tp"])


@dataclass
class GradvarSettings:
    particle_counts: List[int] = field(default_factory=lambda: [50, 100, 150, 200, 250])
    repetitions: int = 50
    estimators: List[str] = field(default_factory=lambda: ["rp", "lr", "biw-lr", "tp"])


def _default_of(f: dataclasses.Field) -> Any:
    if f.default is not dataclasses.MISSING:
        return f.default
    return f.default_factory()


def _check_types(obj: Any, section: str) -> None:
    """Vergleicht jeden Wert mit dem Typ seines Standardwerts (int ist als float erlaubt)."""
    for f in fields(obj):
        value, default = getattr(obj, f.name), _default_of(f)
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, (int, float)):
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            if isinstance(default, int) and ok:
                ok = float(value).is_integer()
                if ok:
                    setattr(obj, f.name, int(value))
        else:
            ok = isinstance(value, type(default))
        if not ok:
            error_msg = f"'{section}.{f.name}' hat den falschen Typ: {value!r}"
            logger.error(error_msg)
            raise ConfigError(error_msg)


def _build(cls: Type[T], data: Optional[Dict[str, Any]], section: str) -> T:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"Abschnitt '{section}' muss ein Objekt sein")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        error_msg = f"Unbekannte Schlüssel in '{section}': {sorted(unknown)}"
        logger.error(error_msg)
        raise ConfigError(error_msg)
    try:
        obj = cls(**data)
    except TypeError as e:
        raise ConfigError(f"Ungültiger Abschnitt '{section}': {e}") from e
    _check_types(obj, section)
    return obj


@dataclass
class ExperimentConfig:
    seed: int = 1
    workers: int = 1
    environment: EnvironmentSettings = field(default_factory=EnvironmentSettings)
    gp: GpSettings = field(default_factory=GpSettings)
    policy: PolicySettings = field(default_factory=PolicySettings)
    rollout: RolloutSettings = field(default_factory=RolloutSettings)
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    trials: TrialSettings = field(default_factory=TrialSettings)
    landscape: LandscapeSettings = field(default_factory=LandscapeSettings)
    gradvar: GradvarSettings = field(default_factory=GradvarSettings)

    _SECTIONS = {
        "environment": EnvironmentSettings, "gp": GpSettings, "policy": PolicySettings,
        "rollout": RolloutSettings, "estimator": EstimatorSettings, "optimizer": OptimizerSettings,
        "trials": TrialSettings, "landscape": LandscapeSettings, "gradvar": GradvarSettings,
    }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("Konfiguration muss ein JSON-Objekt sein")
        unknown = set(data) - set(cls._SECTIONS) - {"seed", "workers"}
        if unknown:
            error_msg = f"Unbekannte Schlüssel in der Konfiguration: {sorted(unknown)}"
            logger.error(error_msg)
            raise ConfigError(error_msg)
        sections = {name: _build(section_cls, data.get(name), name) for name, section_cls in cls._SECTIONS.items()}
        cfg = cls(seed=data.get("seed", 1), workers=data.get("workers", 1), **sections)
        cfg.validate()
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        cfg = dataclasses.replace(self, seed=int(seed))
        cfg.validate()
        return cfg

    def _require(self, condition: bool, message: str) -> None:
        if not condition:
            logger.error(message)
            raise ConfigError(message)

    def validate(self) -> None:
        """Prüft Wertebereiche; Fehler werden als ConfigError gemeldet."""
        self._require(isinstance(self.seed, int) and self.seed >= 0, f"seed muss eine ganze Zahl >= 0 sein: {self.seed}")
        self._require(isinstance(self.workers, int) and self.workers >= 1, f"workers muss >= 1 sein: {self.workers}")
        env = self.environment
        self._require(len(env.initial_mean) == 4 and len(env.initial_std) == 4,
                      "initial_mean und initial_std brauchen 4 Einträge")
        self._require(env.cost in {v.value for v in CostVariant if v is not CostVariant.QUADRATIC},
                      f"Unbekannte Kostenvariante: {env.cost}")
        self._require(self.gp.restarts >= 1 and self.gp.max_iter >= 1, "gp.restarts und gp.max_iter müssen >= 1 sein")
        self._require(self.policy.kind in POLICY_KINDS, f"Unbekannter Policy-Typ: {self.policy.kind}")
        self._require(self.policy.n_basis >= 1, "policy.n_basis muss >= 1 sein")
        self._require(self.rollout.mode in {m.value for m in RolloutMode}, f"Unbekannter Modus: {self.rollout.mode}")
        self._require(self.rollout.n_particles >= 1 and self.rollout.horizon >= 1,
                      "rollout.n_particles und rollout.horizon müssen >= 1 sein")
        self._require(self.rollout.noise_variance_multiplier >= 0, "noise_variance_multiplier muss >= 0 sein")
        est = self.estimator
        self._require(est.tag in ESTIMATORS, f"Unbekannter Schätzer: {est.tag}")
        self._require(est.variance_strategy in VARIANCE_STRATEGIES, f"Unbekannte Strategie: {est.variance_strategy}")
        needs_pairs = est.tag in ("lr", "biw-lr", "tp")
        self._require(not needs_pairs or self.rollout.n_particles >= 2, f"{est.tag} benötigt mindestens 2 Partikel")
        opt = self.optimizer
        self._require(opt.learning_rate > 0 and 0 <= opt.momentum < 1 and opt.delta > 0,
                      "Optimierer: learning_rate > 0, momentum in [0, 1), delta > 0")
        tr = self.trials
        self._require(tr.random_trials >= 1 and tr.learned_trials >= 0, "random_trials >= 1, learned_trials >= 0")
        self._require(tr.evals_per_trial >= 1 and tr.eval_repeats >= 1, "evals_per_trial und eval_repeats >= 1")
        self._require(self.landscape.grid_points >= 1 and self.landscape.n_particles >= 2,
                      "landscape: grid_points >= 1, n_particles >= 2")
        self._require(self.gradvar.repetitions >= 2 and all(p >= 2 for p in self.gradvar.particle_counts),
                      "gradvar: repetitions >= 2, Partikelzahlen >= 2")
        for tag in list(self.landscape.estimators) + list(self.gradvar.estimators):
            self._require(tag in ESTIMATORS, f"Unbekannter Schätzer: {tag}")

    # Abgeleitete Objekte der einzelnen Pakete

    def cartpole_params(self) -> CartPoleParams:
        env = self.environment
        return CartPoleParams(env.cart_mass, env.pole_mass, env.pole_length, env.friction, env.gravity, env.u_max,
                              env.control_period, env.substeps)

    def noise_config(self) -> NoiseConfig:
        return NoiseConfig(self.environment.noise_multiplier)

    def initial_state(self) -> GaussianInitialState:
        return GaussianInitialState(tuple(self.environment.initial_mean), tuple(self.environment.initial_std))

    def cost_config(self) -> CostConfig:
        env = self.environment
        return CostConfig(variant=CostVariant(env.cost), tip_lengthscale=env.tip_lengthscale,
                          pole_length=env.pole_length)

    def policy_env_info(self) -> PolicyEnvInfo:
        return PolicyEnvInfo(state_dim=4, action_dim=1, angle_dims=ANGLE_DIMS, u_max=self.environment.u_max,
                             initial_state=self.initial_state())

    def training_settings(self, *keys: int) -> TrainingSettings:
        return TrainingSettings(restarts=self.gp.restarts, max_iter=self.gp.max_iter,
                                seed=derive_seed(self.seed, StreamTag.GP_RESTARTS, *keys))

    def rollout_config(self, *keys: int, n_particles: Optional[int] = None) -> RolloutConfig:
        """Rollout-Konfiguration mit einem aus dem Master-Seed abgeleiteten Seed."""
        ro = self.rollout
        return RolloutConfig(n_particles=n_particles or ro.n_particles, horizon=ro.horizon, mode=RolloutMode(ro.mode),
                             fixed_seed=ro.fixed_seed, drop_model_uncertainty=ro.drop_model_uncertainty,
                             noise_variance_multiplier=ro.noise_variance_multiplier,
                             seed=derive_seed(self.seed, StreamTag.ROLLOUT, *keys))


def load_config(file_path: Optional[str]) -> ExperimentConfig:
    """Liest eine Konfigurationsdatei; ohne Pfad gelten die Standardwerte."""
    if file_path is None:
        return ExperimentConfig()
    try:
        data = import_json_file(file_path)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Konfiguration nicht lesbar: {file_path}: {e}") from e
    return ExperimentConfig.from_dict(data)

