"""Kommandozeile: learn, landscape, gradvar, rollout, gp-fit.

Exit-Codes: 0 Erfolg, 1 Konfigurationsfehler, 2 numerischer Fehler
(FAILURE-Flag oder nicht behebbar schlecht konditionierte Daten).
"""
import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Tuple

import numpy as np

from core.errors import ConfigError, ContractViolation, IllConditionedError
from core.flags import flags
from core.json_io import export_json_file
from core.logger_service import LoggerService
from core.streams import StreamTag, derive_seed
from environment.cartpole import CartPole
from environment.costs import make_cost
from environment.trial import random_controller, run_trial
from gp_model.checkpoint import load_model, save_model
from gp_model.dataset import build_dataset
from gp_model.gp_model import GpModel
from gp_model.training import fit_model
from harness.config import ExperimentConfig, load_config
from harness.diagnostics import landscape_scan, variance_scan
from harness.learner import LearningAborted, learn
from harness.results import read_trials_csv, write_csv
from policy.checkpoint import load_policy
from policy.params import PolicyParams
from rollout.propagate import rollout_batch

logger = logging.getLogger(__name__)

# Konstanten
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
LOG_FILE = 'pipps.log'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipps", description="Partikelbasierte modellbasierte Policy-Suche")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("learn", "Episodische Lernschleife"),
                       ("landscape", "Wertelandschaft entlang einer Zufallsrichtung"),
                       ("gradvar", "Gradientenvarianz über die Partikelzahl"),
                       ("rollout", "Ein Partikel-Rollout aus Checkpoints"),
                       ("gp-fit", "GP-Modell aus Zufalls-Trials oder trials.csv lernen")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", help="Experimentkonfiguration (JSON)")
        cmd.add_argument("--seed", type=int, help="Master-Seed, überschreibt die Konfiguration")
        cmd.add_argument("--out", default="out", help="Ausgabeverzeichnis")
        cmd.add_argument("--workers", type=int, help="Anzahl paralleler Worker")
        cmd.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        if name in ("landscape", "gradvar", "rollout"):
            cmd.add_argument("--model", required=True, help="GP-Checkpoint (model.json)")
            cmd.add_argument("--policy", required=True, help="Policy-Checkpoint")
        if name == "rollout":
            cmd.add_argument("--dump-tapes", action="store_true", help="Band als tape.csv schreiben")
        if name == "gp-fit":
            cmd.add_argument("--data", help="trials.csv mit Übergängen")
    return parser


def configure_logging(out_dir: str, level: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT,
                        handlers=[logging.FileHandler(os.path.join(out_dir, LOG_FILE)),
                                  logging.StreamHandler(sys.stdout)])


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config).with_seed(args.seed)
    if args.workers is not None:
        data = cfg.to_dict()
        data["workers"] = args.workers
        cfg = ExperimentConfig.from_dict(data)
    return cfg


def _load_checkpoints(args: argparse.Namespace) -> Tuple[GpModel, PolicyParams]:
    try:
        return load_model(args.model), load_policy(args.policy)
    except (OSError, json.JSONDecodeError, KeyError, ContractViolation) as e:
        raise ConfigError(f"Checkpoint nicht lesbar: {e}") from e


def _write_summary(out_dir: str, name: str, cfg: ExperimentConfig, **payload) -> None:
    export_json_file(os.path.join(out_dir, name),
                     {"config": cfg.to_dict(), "seed": cfg.seed, **payload, "flags": flags.summary()})


def run_learn(args, cfg: ExperimentConfig) -> None:
    try:
        result = learn(cfg, args.out)
    except LearningAborted:
        raise IllConditionedError("Lernlauf abgebrochen, Teilergebnisse gespeichert")
    LoggerService("CLI").info(f"Lernlauf beendet: Erfolg={result.success}, "
                              f"mittlere Kosten {result.final_mean_cost:.4f}")


def run_landscape(args, cfg: ExperimentConfig) -> None:
    model, params = _load_checkpoints(args)
    header, rows = landscape_scan(cfg, model, params)
    write_csv(os.path.join(args.out, "landscape.csv"), header, rows)
    _write_summary(args.out, "result.json", cfg, command="landscape")


def run_gradvar(args, cfg: ExperimentConfig) -> None:
    model, params = _load_checkpoints(args)
    header, rows = variance_scan(cfg, model, params)
    write_csv(os.path.join(args.out, "gradvar.csv"), header, rows)
    _write_summary(args.out, "result.json", cfg, command="gradvar")


def run_rollout(args, cfg: ExperimentConfig) -> None:
    model, params = _load_checkpoints(args)
    tape = rollout_batch(model, params, cfg.rollout_config(0), cfg.initial_state(), make_cost(cfg.cost_config()))
    if args.dump_tapes:
        tape.dump_csv(os.path.join(args.out, "tape.csv"))
    _write_summary(args.out, "rollout.json", cfg, mean_return=tape.mean_return(),
                   standard_error=tape.return_standard_error(), n_particles=tape.n_particles,
                   horizon=tape.horizon, truncated=int((~tape.alive[-1]).sum()))


def run_gp_fit(args, cfg: ExperimentConfig) -> None:
    if args.data:
        try:
            records = read_trials_csv(args.data)
        except (OSError, KeyError, ValueError) as e:
            raise ConfigError(f"Trial-Daten nicht lesbar: {e}") from e
    else:
        env, cost = CartPole(cfg.cartpole_params()), make_cost(cfg.cost_config())
        records = []
        for index in range(cfg.trials.random_trials):
            rng = np.random.default_rng(derive_seed(cfg.seed, StreamTag.TRIAL, index))
            records.append(run_trial(env, random_controller(env.u_max, rng), cfg.rollout.horizon, cfg.noise_config(),
                                     rng, cfg.initial_state(), cost))
    inputs, targets = build_dataset(records)
    model = fit_model(inputs, targets, cfg.gp.restarts, cfg.training_settings(0))
    save_model(model, os.path.join(args.out, "model.json"))
    dims = [{"dim": a, "nlml": model.nlml(a)[0], "hyperparams": h.to_dict(), "jitter": j}
            for a, (h, j) in enumerate(zip(model.hyperparams, model.jitter))]
    _write_summary(args.out, "gp_fit.json", cfg, n_points=model.n_points, dims=dims)


COMMANDS = {"learn": run_learn, "landscape": run_landscape, "gradvar": run_gradvar,
            "rollout": run_rollout, "gp-fit": run_gp_fit}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.out, args.log_level)
    service = LoggerService("CLI")
    flags.clear()
    try:
        cfg = _resolve_config(args)
        COMMANDS[args.command](args, cfg)
    except (ConfigError, ContractViolation) as e:
        service.error(f"Konfigurationsfehler: {e}")
        return EXIT_CONFIG
    except IllConditionedError as e:
        service.error(f"Numerischer Fehler: {e}", exc_info=True)
        return EXIT_NUMERIC
    if flags.has_failures():
        service.warning(f"Numerische Fehler gemeldet: {flags.counts()}")
        return EXIT_NUMERIC
    return EXIT_OK
