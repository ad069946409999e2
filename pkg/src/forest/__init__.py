"""
Random Similarity Isolation Forest model
"""
from .forest import RSIFModel, check_schema, fit, predict, score, score_batch
from .params import DistanceConfig, FitParams
from .projection import ReferencePair, SelectionStrategy, project, project_column, select_pair, select_pair_two_step
from .scoring import anomaly_score, avg_path_c
from .tree import InternalNode, Leaf, RSITree, SplitContext, build_tree, path_length, random_threshold
