"""Ergebnisdateien: result.json, timing.json und CSV-Tabellen."""
import csv
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from core.json_io import export_json_file
from environment.trial import TRIAL_CSV_COLUMNS, TrialRecord

logger = logging.getLogger(__name__)

RESULT_FILE = "result.json"
TIMING_FILE = "timing.json"
TRIALS_FILE = "trials.csv"
OPTLOG_FILE = "optlog.csv"
CHECKPOINT_DIR = "checkpoints"


@dataclass
class EvaluationSummary:
    mean_return: float
    mean_cost: float
    returns: List[float]


@dataclass
class TrialSummary:
    index: int
    kind: str
    total_cost: float
    mean_cost: float
    predicted_return: Optional[float] = None
    evaluation: Optional[EvaluationSummary] = None


@dataclass
class RunResult:
    """Alles, was ein Lernlauf hinterlässt; wall_clock landet nur in timing.json."""
    config: Dict[str, Any]
    seed: int
    trials: List[TrialSummary] = field(default_factory=list)
    initial_evaluation: Optional[EvaluationSummary] = None
    success: bool = False
    final_mean_cost: Optional[float] = None
    aborted: Optional[str] = None
    flags: Dict[str, Any] = field(default_factory=dict)
    checkpoints: Dict[str, str] = field(default_factory=dict)
    optimizer_log: List[List[Any]] = field(default_factory=list)
    trial_records: List[TrialRecord] = field(default_factory=list)
    wall_clock: float = 0.0

    def final_evaluation(self) -> Optional[EvaluationSummary]:
        for trial in reversed(self.trials):
            if trial.evaluation is not None:
                return trial.evaluation
        return self.initial_evaluation

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "seed": self.seed,
            "success": self.success,
            "final_mean_cost": self.final_mean_cost,
            "aborted": self.aborted,
            "initial_evaluation": asdict(self.initial_evaluation) if self.initial_evaluation else None,
            "trials": [asdict(t) for t in self.trials],
            "flags": self.flags,
            "checkpoints": self.checkpoints,
        }


def write_csv(file_path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(header))
        writer.writerows(rows)
    logger.debug(f"CSV geschrieben: {file_path}")


def trial_rows(records: Sequence[TrialRecord], kinds: Sequence[str]) -> List[List[Any]]:
    rows = []
    for index, (record, kind) in enumerate(zip(records, kinds)):
        rows.extend([index, kind] + row for row in record.csv_rows())
    return rows


def write_run_result(out_dir: str, result: RunResult, optlog_header: Sequence[str]) -> None:
    """Schreibt result.json, timing.json, trials.csv und optlog.csv."""
    export_json_file(os.path.join(out_dir, RESULT_FILE), result.to_dict())
    export_json_file(os.path.join(out_dir, TIMING_FILE), {"wall_clock_seconds": result.wall_clock})
    kinds = [t.kind for t in result.trials]
    write_csv(os.path.join(out_dir, TRIALS_FILE), ["trial", "kind"] + TRIAL_CSV_COLUMNS,
              trial_rows(result.trial_records, kinds))
    write_csv(os.path.join(out_dir, OPTLOG_FILE), ["trial"] + list(optlog_header), result.optimizer_log)
    logger.info(f"Ergebnisse geschrieben nach {out_dir}")


def read_trials_csv(file_path: str) -> List[TrialRecord]:
    """Liest eine trials.csv zurück (wahre Zustände = Beobachtungen)."""
    grouped: Dict[int, List[Dict[str, str]]] = {}
    with open(file_path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            grouped.setdefault(int(row["trial"]), []).append(row)
    records = []
    state_columns = TRIAL_CSV_COLUMNS[1:5]
    for index in sorted(grouped):
        rows = sorted(grouped[index], key=lambda r: int(r["t"]))
        observations = np.array([[float(r[c]) for c in state_columns] for r in rows])
        actions = np.array([[float(r["u"])] for r in rows[:-1]]).reshape(len(rows) - 1, 1)
        costs = np.array([float(r["cost"]) for r in rows])
        records.append(TrialRecord(true_states=observations, observations=observations, actions=actions,
                                   costs=costs))
    logger.info(f"{len(records)} Trials gelesen: {file_path}")
    return records
