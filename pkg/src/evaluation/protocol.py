"""
Evaluation protocol: stratified splits, repeated trials, validation-based
distance selection and one-at-a-time hyperparameter sweeps.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import train_test_split

from ..core import config
from ..core.dataset import Dataset
from ..core.errors import ConfigError, EvaluationError
from ..forest.forest import fit, score_batch
from ..forest.params import DistanceConfig, FitParams
from .metrics import average_precision, roc_auc

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("t", "psi", "m", "strategy")


@dataclass(frozen=True)
class TrialPlan:
    train_fraction: float = config.DEFAULT_TRAIN_FRACTION
    trials: int = config.DEFAULT_TRIALS
    validation_fraction: float = config.DEFAULT_VALIDATION_FRACTION
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        for name in ("train_fraction", "validation_fraction"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class TrialResult:
    seed: int
    ap: float
    auc: float
    config: Optional[DistanceConfig] = None

    def to_dict(self) -> Dict[str, Any]:
        entry = {"seed": self.seed, "ap": self.ap, "auc": self.auc}
        if self.config is not None:
            entry["config"] = self.config.to_json()
        return entry


@dataclass(frozen=True)
class MetricsReport:
    """
    Per-trial AP and AUC with their means and (population) standard deviations.
    """

    trials: Tuple[TrialResult, ...] = field(default_factory=tuple)

    @property
    def aps(self) -> np.ndarray:
        return np.array([trial.ap for trial in self.trials], dtype=float)

    @property
    def aucs(self) -> np.ndarray:
        return np.array([trial.auc for trial in self.trials], dtype=float)

    @property
    def mean_ap(self) -> float:
        return float(np.mean(self.aps))

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def std_ap(self) -> float:
        return float(np.std(self.aps))

    @property
    def std_auc(self) -> float:
        return float(np.std(self.aucs))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": [trial.to_dict() for trial in self.trials],
            "mean_ap": self.mean_ap,
            "mean_auc": self.mean_auc,
            "std_ap": self.std_ap,
            "std_auc": self.std_auc,
        }


def _require_labels(dataset: Dataset) -> np.ndarray:
    if dataset.labels is None:
        raise EvaluationError(f"dataset '{dataset.name}' has no labels")
    return dataset.labels


def stratified_holdout(dataset: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """
    Split a labeled dataset into train and test parts with preserved class proportions.

    A class with a single example cannot be stratified; that example goes to
    the test part, the only part whose labels are scored, and the remaining
    rows are split as usual.

    Args:
        dataset: Labeled dataset with both classes
        fraction: Share of examples going to the train part
        seed: Split seed

    Returns:
        Tuple[Dataset, Dataset]: (train, test); rows keep their original order

    Raises:
        EvaluationError: if a class is missing or too few rows remain to split
    """
    labels = _require_labels(dataset)
    counts = np.bincount(labels, minlength=2)
    if counts.min() == 0:
        raise EvaluationError("stratified split needs both inliers and outliers")
    singleton = np.isin(labels, np.flatnonzero(counts == 1))
    rest = np.flatnonzero(~singleton)
    if len(rest) < 2:
        raise EvaluationError(f"cannot split {dataset.n} examples: every class has a single example")
    try:
        train_idx, test_idx = train_test_split(
            rest, train_size=fraction, stratify=labels[rest], random_state=seed % 2**32,
        )
    except ValueError as e:
        raise EvaluationError(f"cannot split {dataset.n} examples with train fraction {fraction}: {e}") from e
    test_idx = np.concatenate([test_idx, np.flatnonzero(singleton)])
    return dataset.take(np.sort(train_idx)), dataset.take(np.sort(test_idx))


def _validation_ap(fit_part: Dataset, validation: Dataset, params: FitParams) -> float:
    model = fit(fit_part.without_labels(), params)
    return average_precision(validation.labels, score_batch(model, validation))


def select_distances(train: Dataset, candidates: Sequence[DistanceConfig], params: FitParams,
                     plan: TrialPlan, seed: Optional[int] = None, n_jobs: int = 1) -> DistanceConfig:
    """
    Choose the distance configuration with the best validation AP.

    Args:
        train: Labeled training data
        candidates: Distance configurations to compare
        params: Hyperparameters shared by every candidate
        plan: Supplies the validation fraction
        seed: Validation split seed (defaults to plan.seed)
        n_jobs: Candidates fitted concurrently

    Returns:
        DistanceConfig: Highest validation AP, first candidate on ties
    """
    if not candidates:
        raise ConfigError("select_distances needs at least one candidate")
    if len(candidates) == 1:
        return candidates[0]
    seed = plan.seed if seed is None else seed
    fit_part, validation = stratified_holdout(train, 1.0 - plan.validation_fraction, seed)
    aps = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_validation_ap)(fit_part, validation, params.replace(config=candidate)) for candidate in candidates
    )
    best = int(np.argmax(aps))
    logger.info(f"Validation AP per candidate: {[round(ap, 4) for ap in aps]}; selected candidate {best}")
    return candidates[best]


def _run_trial(dataset: Dataset, params: FitParams, plan: TrialPlan, trial: int,
               candidates: Optional[Sequence[DistanceConfig]]) -> TrialResult:
    seed = plan.seed + trial
    train, test = stratified_holdout(dataset, plan.train_fraction, seed)
    trial_params = params.replace(seed=seed)
    chosen = None
    if candidates:
        chosen = select_distances(train, candidates, trial_params, plan, seed=seed)
        trial_params = trial_params.replace(config=chosen)
    model = fit(train.without_labels(), trial_params)
    scores = score_batch(model, test)
    result = TrialResult(seed=seed, ap=average_precision(test.labels, scores),
                         auc=roc_auc(test.labels, scores), config=chosen)
    logger.info(f"Trial {trial + 1}/{plan.trials} (seed={seed}): AP={result.ap:.4f}, AUC={result.auc:.4f}")
    return result


def run_trials(dataset: Dataset, params: FitParams, plan: TrialPlan,
               candidates: Optional[Sequence[DistanceConfig]] = None, n_jobs: int = 1) -> MetricsReport:
    """
    Repeat split / fit / score for every trial of the plan.

    Trial j re-draws the split and reseeds the forest with plan.seed + j.

    Args:
        dataset: Labeled dataset
        params: Hyperparameters (params.seed is replaced per trial)
        plan: Trial plan
        candidates: When given, distances are chosen per trial with select_distances
        n_jobs: Trials run concurrently

    Returns:
        MetricsReport: Results in trial order
    """
    _require_labels(dataset)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_run_trial)(dataset, params, plan, j, candidates) for j in range(plan.trials)
    )
    report = MetricsReport(trials=tuple(results))
    logger.info(f"{plan.trials} trials: AP={report.mean_ap:.4f}±{report.std_ap:.4f}, "
                f"AUC={report.mean_auc:.4f}±{report.std_auc:.4f}")
    return report


def sensitivity_sweep(dataset: Dataset, params: FitParams, plan: TrialPlan, parameter: str,
                      values: Sequence[Any], n_jobs: int = 1) -> pd.DataFrame:
    """
    Vary one hyperparameter while the others stay fixed.

    Args:
        dataset: Labeled dataset
        params: Baseline hyperparameters
        plan: Trial plan used for every value
        parameter: One of t, psi, m, strategy
        values: Values to try, in output order

    Returns:
        pd.DataFrame: One row per value with mean/std AP and AUC
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"cannot sweep '{parameter}'; choose one of {', '.join(SWEEP_PARAMETERS)}")
    rows: List[Dict[str, Any]] = []
    for value in values:
        report = run_trials(dataset, params.replace(**{parameter: value}), plan, n_jobs=n_jobs)
        rows.append({
            "parameter": parameter,
            "value": value,
            "mean_ap": report.mean_ap,
            "std_ap": report.std_ap,
            "mean_auc": report.mean_auc,
            "std_auc": report.std_auc,
        })
    return pd.DataFrame(rows, columns=["parameter", "value", "mean_ap", "std_ap", "mean_auc", "std_auc"])
