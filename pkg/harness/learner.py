"""Episodische Lernschleife: Zufalls-Trials, dann abwechselnd Modell lernen, Policy optimieren, Trial ausführen."""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np

from core.errors import IllConditionedError, PippsError
from core.flags import flags
from core.logger_service import LoggerService
from core.streams import StreamTag, derive_seed
from environment.cartpole import CartPole
from environment.costs import make_cost
from environment.trial import TrialRecord, random_controller, run_trial
from gp_model.checkpoint import save_model
from gp_model.dataset import build_dataset
from gp_model.gp_model import GpModel
from gp_model.training import fit_model
from gradients.registry import estimate_gradient, estimator_rollout_config
from gradients.variance import make_strategy
from harness.config import ExperimentConfig
from harness.results import (CHECKPOINT_DIR, EvaluationSummary, RunResult, TrialSummary, write_run_result)
from optimizer.sgd import OPTLOG_COLUMNS, OptimizerLog, OptState, sgd_step
from policy.checkpoint import save_policy
from policy.params import PolicyParams, policy_init
from rollout.propagate import rollout_batch

logger = logging.getLogger(__name__)


class LearningAborted(PippsError):
    """Abbruch der Lernschleife; das Teilergebnis hängt an der Ausnahme."""

    def __init__(self, message: str, result: RunResult):
        super().__init__(message)
        self.result = result


def policy_controller(params: PolicyParams):
    def controller(observation: np.ndarray) -> np.ndarray:
        return params.policy.evaluate(params.theta, observation[None, :])[0]
    return controller


class Learner:
    """Führt einen Lernlauf für eine ExperimentConfig aus."""

    def __init__(self, cfg: ExperimentConfig, out_dir: Optional[str] = None):
        self.cfg = cfg
        self.out_dir = out_dir
        self.logger = LoggerService("Learner")
        self.env = CartPole(cfg.cartpole_params())
        self.cost = make_cost(cfg.cost_config())
        self.noise = cfg.noise_config()
        self.initial_state = cfg.initial_state()
        self.records: List[TrialRecord] = []
        self.result = RunResult(config=cfg.to_dict(), seed=cfg.seed)

    def _trial_rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(derive_seed(self.cfg.seed, StreamTag.TRIAL, index))

    def _execute(self, controller, rng: np.random.Generator) -> TrialRecord:
        return run_trial(self.env, controller, self.cfg.rollout.horizon, self.noise, rng, self.initial_state,
                         self.cost)

    def _append_trial(self, record: TrialRecord, kind: str, predicted: Optional[float] = None,
                      evaluation: Optional[EvaluationSummary] = None) -> None:
        index = len(self.records)
        self.records.append(record)
        self.result.trial_records.append(record)
        self.result.trials.append(TrialSummary(index=index, kind=kind, total_cost=record.total_cost,
                                               mean_cost=record.mean_cost, predicted_return=predicted,
                                               evaluation=evaluation))
        self.logger.info(f"Trial {index} ({kind}): Gesamtkosten {record.total_cost:.4f}")

    def _random_trials(self) -> None:
        """Zufallsaktionen, gleichverteilt in [-u_max, u_max]."""
        for _ in range(self.cfg.trials.random_trials):
            rng = self._trial_rng(len(self.records))
            record = self._execute(random_controller(self.env.u_max, rng), rng)
            self._append_trial(record, "random")

    def evaluate(self, params: PolicyParams, eval_index: int) -> EvaluationSummary:
        """Wiederholte Trials nur zur Bewertung; sie gehen nie in die Trainingsdaten ein."""
        controller = policy_controller(params)

        def one(repeat: int) -> TrialRecord:
            rng = np.random.default_rng(derive_seed(self.cfg.seed, StreamTag.EVALUATION, eval_index, repeat))
            return self._execute(controller, rng)

        repeats = range(self.cfg.trials.eval_repeats)
        if self.cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                records = list(pool.map(one, repeats))
        else:
            records = [one(r) for r in repeats]
        returns = [r.total_cost for r in records]
        summary = EvaluationSummary(mean_return=float(np.mean(returns)),
                                    mean_cost=float(np.mean([r.mean_cost for r in records])), returns=returns)
        self.logger.info(f"Bewertung {eval_index}: mittlere Kosten pro Schritt {summary.mean_cost:.4f}")
        return summary

    def train_model(self, trial: int) -> GpModel:
        inputs, targets = build_dataset(self.records)
        self.logger.info(f"GP-Training vor Trial {trial}: {inputs.shape[0]} Übergänge")
        return fit_model(inputs, targets, self.cfg.gp.restarts, self.cfg.training_settings(trial))

    def optimize(self, model: GpModel, params: PolicyParams, trial: int) -> Tuple[PolicyParams, float]:
        """Führt evals_per_trial Gradientenschritte im Modell aus."""
        est_cfg = self.cfg.estimator
        rollout_cfg = estimator_rollout_config(est_cfg.tag, self.cfg.rollout_config(trial))
        strategy = make_strategy(est_cfg.variance_strategy, est_cfg.ema_decay, est_cfg.subset)
        mask = params.policy.freeze_mask(self.cfg.policy.frozen)
        opt = OptState.initial(params.n_params, self.cfg.optimizer.learning_rate, self.cfg.optimizer.momentum,
                               self.cfg.optimizer.delta)
        log = OptimizerLog()
        theta = params.theta
        predicted = float("nan")
        for step in range(self.cfg.trials.evals_per_trial):
            tape = rollout_batch(model, params.with_theta(theta), rollout_cfg, self.initial_state, self.cost,
                                 call_index=step)
            predicted = tape.mean_return()
            estimate = estimate_gradient(est_cfg.tag, tape, est_cfg.tp_biw, strategy).masked(mask)
            opt, theta = sgd_step(opt, theta, estimate, mask)
            log.record(opt, estimate)
            if step % 100 == 0:
                self.logger.debug(f"Schritt {step}: vorhergesagte Rückgabe {predicted:.4f}")
        self.result.optimizer_log.extend([trial] + row for row in log.rows)
        self.logger.info(f"Optimierung vor Trial {trial}: vorhergesagte Rückgabe {predicted:.4f}")
        return params.with_theta(theta), predicted

    def _checkpoint(self, model: GpModel, params: PolicyParams, trial: int) -> None:
        if self.out_dir is None:
            return
        directory = os.path.join(self.out_dir, CHECKPOINT_DIR)
        model_path = os.path.join(directory, f"model_trial{trial}.json")
        policy_path = os.path.join(directory, f"policy_trial{trial}.json")
        save_model(model, model_path)
        save_policy(params, policy_path)
        self.result.checkpoints.update({"model": os.path.relpath(model_path, self.out_dir),
                                        "policy": os.path.relpath(policy_path, self.out_dir)})

    def _finish(self, start: float) -> RunResult:
        final = self.result.final_evaluation()
        self.result.final_mean_cost = final.mean_cost if final else None
        self.result.success = bool(final is not None and final.mean_cost < self.cfg.trials.success_threshold)
        self.result.flags = flags.summary()
        self.result.wall_clock = time.perf_counter() - start
        if self.out_dir is not None:
            write_run_result(self.out_dir, self.result, OPTLOG_COLUMNS)
        return self.result

    def run(self) -> RunResult:
        start = time.perf_counter()
        flags.clear()
        self._random_trials()
        params = policy_init(self.cfg.policy.kind,
                             np.random.default_rng(derive_seed(self.cfg.seed, StreamTag.POLICY_INIT)),
                             self.cfg.policy_env_info(), self.cfg.policy.n_basis)
        self.result.initial_evaluation = self.evaluate(params, 0)
        for trial in range(self.cfg.trials.learned_trials):
            try:
                model = self.train_model(trial)
            except IllConditionedError as e:
                self.logger.error(f"GP-Training vor Trial {trial} fehlgeschlagen: {e}", exc_info=True)
                self.result.aborted = str(e)
                self.result.flags = flags.summary()
                result = self._finish(start)
                raise LearningAborted(str(e), result) from e
            params, predicted = self.optimize(model, params, trial)
            record = self._execute(policy_controller(params), self._trial_rng(len(self.records)))
            evaluation = self.evaluate(params, trial + 1)
            self._append_trial(record, "learned", predicted, evaluation)
            self._checkpoint(model, params, trial)
        return self._finish(start)


def learn(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> RunResult:
    return Learner(cfg, out_dir).run()
