"""
Tests for the evaluation protocol.
"""
import numpy as np
import pytest

from src.core.dataset import Dataset, FeatureColumn, FeatureKind
from src.core.errors import ConfigError, EvaluationError
from src.evaluation import (
    MetricsReport,
    TrialPlan,
    TrialResult,
    average_precision,
    roc_auc,
    run_trials,
    select_distances,
    sensitivity_sweep,
    stratified_holdout,
    synth_gaussian,
)
from src.forest import DistanceConfig, FitParams, fit, score_batch


def _labelled_numeric(n, outliers):
    labels = np.zeros(n, dtype=int)
    labels[np.linspace(0, n - 1, outliers).astype(int)] = 1
    column = FeatureColumn(id="x", kind=FeatureKind.NUMERIC, values=np.arange(n, dtype=float))
    return Dataset(columns=(column,), labels=labels, name="numbered")


def _row_ids(dataset):
    return dataset.column("x").values[:, 0].astype(int).tolist()


@pytest.fixture
def gaussian():
    return synth_gaussian(80, 0.1, dims=2, seed=4)


@pytest.fixture
def gaussian_params():
    return FitParams(config=DistanceConfig(features={"x": ["euclidean"]}), t=15, psi=32, m=0.5)


def test_stratified_holdout_counts():
    dataset = _labelled_numeric(100, 5)
    train, test = stratified_holdout(dataset, 0.7, seed=0)
    assert abs(train.n - 70) <= 1
    assert 3 <= int(train.labels.sum()) <= 4
    assert train.n + test.n == 100
    assert int(train.labels.sum()) + int(test.labels.sum()) == 5


def test_stratified_holdout_partitions():
    dataset = _labelled_numeric(50, 6)
    for seed in range(20):
        train, test = stratified_holdout(dataset, 0.7, seed)
        train_ids, test_ids = _row_ids(train), _row_ids(test)
        assert not set(train_ids) & set(test_ids)
        assert sorted(train_ids + test_ids) == list(range(50))
        assert train_ids == sorted(train_ids)
        labels = dataset.labels
        assert train.labels.tolist() == labels[train_ids].tolist()


def test_stratified_holdout_is_deterministic():
    dataset = _labelled_numeric(60, 8)
    first, _ = stratified_holdout(dataset, 0.7, seed=5)
    second, _ = stratified_holdout(dataset, 0.7, seed=5)
    assert _row_ids(first) == _row_ids(second)


def test_stratified_holdout_errors():
    single_class = _labelled_numeric(10, 0)
    with pytest.raises(EvaluationError, match="both inliers and outliers"):
        stratified_holdout(single_class, 0.7, seed=0)
    with pytest.raises(EvaluationError, match="single example"):
        stratified_holdout(_labelled_numeric(2, 1), 0.7, seed=0)
    with pytest.raises(EvaluationError, match="no labels"):
        stratified_holdout(single_class.without_labels(), 0.7, seed=0)


def test_stratified_holdout_single_outlier_goes_to_test():
    dataset = _labelled_numeric(20, 1)
    for seed in range(10):
        train, test = stratified_holdout(dataset, 0.7, seed)
        train_ids, test_ids = _row_ids(train), _row_ids(test)
        assert sorted(train_ids + test_ids) == list(range(20))
        assert int(train.labels.sum()) == 0
        assert int(test.labels.sum()) == 1
        assert abs(train.n - 13) <= 1
    first, _ = stratified_holdout(dataset, 0.7, seed=4)
    second, _ = stratified_holdout(dataset, 0.7, seed=4)
    assert _row_ids(first) == _row_ids(second)


def test_select_distances_with_single_training_outlier():
    train = _labelled_numeric(40, 1)
    candidates = [DistanceConfig(features={"x": ["identity"]}), DistanceConfig(features={"x": ["euclidean"]})]
    params = FitParams(config=candidates[0], t=5, psi=16, m=0.5)
    assert select_distances(train, candidates, params, TrialPlan()) in candidates


@pytest.mark.parametrize("changes", [{"train_fraction": 1.0}, {"validation_fraction": 0.0}, {"trials": 0}])
def test_trial_plan_validation(changes):
    with pytest.raises(ConfigError):
        TrialPlan(**changes)


def test_select_single_candidate(gaussian, gaussian_params):
    only = DistanceConfig(features={"x": ["cosine"]})
    assert select_distances(gaussian, [only], gaussian_params, TrialPlan()) is only


def test_select_duplicate_candidates_returns_first(gaussian, gaussian_params):
    first = DistanceConfig(features={"x": ["euclidean"]})
    second = DistanceConfig(features={"x": ["euclidean"]})
    assert select_distances(gaussian, [first, second], gaussian_params, TrialPlan(), n_jobs=2) is first


def test_select_needs_candidates(gaussian, gaussian_params):
    with pytest.raises(ConfigError):
        select_distances(gaussian, [], gaussian_params, TrialPlan())


def test_single_trial_matches_manual_run(gaussian, gaussian_params):
    plan = TrialPlan(trials=1, seed=3)
    report = run_trials(gaussian, gaussian_params, plan)
    train, test = stratified_holdout(gaussian, plan.train_fraction, 3)
    scores = score_batch(fit(train.without_labels(), gaussian_params.replace(seed=3)), test)
    assert report.trials[0].seed == 3
    assert report.mean_ap == average_precision(test.labels, scores)
    assert report.mean_auc == roc_auc(test.labels, scores)
    assert report.std_ap == 0.0


def test_run_trials_is_deterministic(gaussian, gaussian_params):
    plan = TrialPlan(trials=4, seed=11)
    first = run_trials(gaussian, gaussian_params, plan)
    assert run_trials(gaussian, gaussian_params, plan, n_jobs=3).to_dict() == first.to_dict()
    assert [trial.seed for trial in first.trials] == [11, 12, 13, 14]
    assert first.aps.min() <= first.mean_ap <= first.aps.max()
    assert first.aucs.min() <= first.mean_auc <= first.aucs.max()
    assert all(0.0 <= trial.ap <= 1.0 and 0.0 <= trial.auc <= 1.0 for trial in first.trials)


def test_run_trials_records_chosen_configs(gaussian, gaussian_params):
    candidates = [DistanceConfig(features={"x": ["euclidean"]}), DistanceConfig(features={"x": ["chebyshev"]})]
    report = run_trials(gaussian, gaussian_params, TrialPlan(trials=2), candidates=candidates)
    for entry in report.to_dict()["trials"]:
        assert entry["config"] in ({"x": ["euclidean"]}, {"x": ["chebyshev"]})


def test_run_trials_needs_labels(gaussian, gaussian_params):
    with pytest.raises(EvaluationError):
        run_trials(gaussian.without_labels(), gaussian_params, TrialPlan(trials=1))


def test_report_dict():
    report = MetricsReport(trials=(TrialResult(seed=0, ap=0.5, auc=0.75), TrialResult(seed=1, ap=1.0, auc=0.25)))
    assert report.to_dict() == {
        "trials": [{"seed": 0, "ap": 0.5, "auc": 0.75}, {"seed": 1, "ap": 1.0, "auc": 0.25}],
        "mean_ap": 0.75,
        "mean_auc": 0.5,
        "std_ap": 0.25,
        "std_auc": 0.25,
    }


def test_sensitivity_sweep(gaussian, gaussian_params):
    table = sensitivity_sweep(gaussian, gaussian_params, TrialPlan(trials=2), "t", [5, 10])
    assert list(table.columns) == ["parameter", "value", "mean_ap", "std_ap", "mean_auc", "std_auc"]
    assert table["value"].tolist() == [5, 10]
    assert (table["parameter"] == "t").all()
    assert table["mean_auc"].between(0.0, 1.0).all()


def test_sweep_rejects_unknown_parameter(gaussian, gaussian_params):
    with pytest.raises(ConfigError, match="cannot sweep"):
        sensitivity_sweep(gaussian, gaussian_params, TrialPlan(trials=1), "depth", [1])
