"""
Evaluation protocol, metrics and synthetic data
"""
from .metrics import average_precision, roc_auc
from .protocol import MetricsReport, TrialPlan, TrialResult, run_trials, select_distances, sensitivity_sweep, stratified_holdout
from .reference_iforest import ReferenceIsolationForest
from .synthetic import synth_gaussian, synth_multimodal
