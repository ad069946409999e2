"""
Tests for tree construction and path lengths.
"""
import logging
import math
from collections import Counter

import numpy as np
import pytest

from src.core.dataset import Dataset, FeatureColumn, FeatureKind
from src.core.errors import DegeneratePairError, ModelFormatError
from src.distances import DistanceId, fit_categorical_stats, global_top_pairs, precompute_matrix
from src.forest.params import DistanceConfig
from src.forest.projection import ReferencePair, SelectionStrategy, project_column
from src.forest.scoring import avg_path_c
from src.forest.tree import (
    InternalNode,
    Leaf,
    RSITree,
    SplitContext,
    build_tree,
    path_length,
    path_lengths,
    random_threshold,
    usable_choices,
)
from tests.helpers import make_mixed_dataset, make_numeric_dataset


def make_context(dataset, config, pool=None, strategy=SelectionStrategy.TWO_STEP):
    pool = np.arange(dataset.n) if pool is None else np.asarray(pool)
    stats = {
        fid: fit_categorical_stats(dataset.column(fid).values)
        for fid in config.active_features if dataset.column(fid).kind is FeatureKind.CATEGORICAL
    }
    matrices = {
        (fid, did): precompute_matrix(dataset, fid, did, pool, stats.get(fid))
        for fid, distances in config.items() for did in distances if did is not DistanceId.IDENTITY
    }
    global_pairs = {}
    if strategy is SelectionStrategy.GLOBAL:
        global_pairs = {key: global_top_pairs(matrix) for key, matrix in matrices.items()}
    return SplitContext(dataset=dataset, pool=pool, matrices=matrices, stats=stats, global_pairs=global_pairs)


def _grow(dataset, config, subsample, strategy=SelectionStrategy.TWO_STEP, seed=0, pool=None):
    context = make_context(dataset, config, pool=pool, strategy=strategy)
    max_depth = (len(subsample) - 1).bit_length()
    tree = build_tree(subsample, config, strategy, max_depth, np.random.default_rng(seed), context)
    return tree, context


def test_single_example_is_a_leaf(mixed_dataset, mixed_config):
    tree, _ = _grow(mixed_dataset, mixed_config, [3])
    assert isinstance(tree.root, Leaf)
    assert (tree.root.size, tree.root.depth) == (1, 0)


def test_constant_features_give_a_root_leaf():
    dataset = make_numeric_dataset([5.0] * 8)
    config = DistanceConfig(features={"x": ["euclidean", "identity"]})
    tree, _ = _grow(dataset, config, np.arange(8))
    assert isinstance(tree.root, Leaf)
    assert tree.root.size == 8


@pytest.mark.parametrize("strategy", list(SelectionStrategy))
def test_tree_structure(mixed_config, strategy):
    """Depth stays within max_depth, leaves are never empty and their sizes cover the subsample."""
    dataset = make_mixed_dataset(n=64, seed=2)
    subsample = np.sort(np.random.default_rng(0).choice(64, size=32, replace=False))
    tree, _ = _grow(dataset, mixed_config, subsample, strategy=strategy, pool=np.arange(0, 64, 2))
    assert tree.depth <= tree.max_depth == 5
    leaves = tree.leaves()
    assert sum(leaf.size for leaf in leaves) == 32
    assert all(leaf.size >= 1 for leaf in leaves)
    for node in tree.internal_nodes():
        assert node.pair.is_identity or node.pair.q_index != node.pair.r_index


def test_leaf_sizes_match_routing(mixed_config):
    """Routing the subsample back through the tree reproduces every leaf size."""
    dataset = make_mixed_dataset(n=48, seed=6)
    subsample = np.arange(0, 48, 3)
    tree, context = _grow(dataset, mixed_config, subsample, seed=3)
    counts = Counter(id(tree.leaf_for(dataset.row(i), context.stats)) for i in subsample)
    assert counts == Counter({id(leaf): leaf.size for leaf in tree.leaves()})


def test_path_length_example():
    inner = InternalNode(pair=ReferencePair.identity("x"), threshold=1.5, left=Leaf(4, 2), right=Leaf(1, 2))
    tree = RSITree(root=InternalNode(pair=ReferencePair.identity("x"), threshold=0.5, left=Leaf(1, 1), right=inner),
                   max_depth=3, subsample_size=6)
    expected = 2 + 2.0 * (math.log(3) + 0.5772156649) - 1.5
    assert path_length(tree, {"x": np.array([1.0])}) == pytest.approx(expected)
    assert path_length(tree, {"x": np.array([1.0])}) == 2 + avg_path_c(4)
    assert path_length(tree, {"x": np.array([0.5])}) == 1.0


def test_batch_path_lengths_match_single(mixed_config):
    dataset = make_mixed_dataset(n=40, seed=9)
    tree, context = _grow(dataset, mixed_config, np.arange(0, 40, 2), seed=1)

    def project_rows(pair, rows):
        column = dataset.column(pair.feature_id)
        return project_column(column.values[rows], pair, stats=context.stats.get(pair.feature_id))

    batch = path_lengths(tree, project_rows, dataset.n)
    single = [path_length(tree, dataset.row(i), context.stats) for i in range(dataset.n)]
    assert batch.tolist() == single


def test_random_threshold_is_uniform_and_strict():
    rng = np.random.default_rng(0)
    draws = np.array([random_threshold(np.array([0.0, 0.3, 1.0]), rng) for _ in range(10_000)])
    assert np.all((draws > 0.0) & (draws < 1.0))
    assert draws.mean() == pytest.approx(0.5, abs=0.01)
    assert np.mean(draws < 0.25) == pytest.approx(0.25, abs=0.02)


def test_random_threshold_rejects_constant_projection():
    with pytest.raises(DegeneratePairError):
        random_threshold(np.array([2.0, 2.0]), np.random.default_rng(0))


def test_random_threshold_between_adjacent_floats():
    """No double lies strictly inside; the lower bound still splits both ways."""
    projections = np.array([1.0, np.nextafter(1.0, 2.0), 1.0])
    threshold = random_threshold(projections, np.random.default_rng(0))
    assert threshold == 1.0
    goes_left = projections <= threshold
    assert goes_left.sum() == 2


def test_adjacent_float_column_splits_once():
    dataset = make_numeric_dataset([1.0, np.nextafter(1.0, 2.0), 1.0, 1.0])
    config = DistanceConfig(features={"x": ["identity"]})
    tree, _ = _grow(dataset, config, np.arange(4))
    assert isinstance(tree.root, InternalNode)
    assert tree.root.threshold == 1.0
    assert (tree.root.left.size, tree.root.right.size) == (3, 1)


def test_usable_choices_skip_constant_features():
    """Only features that still vary are drawn, each with equal probability."""
    n = 10
    dataset = Dataset(columns=(
        FeatureColumn(id="a", kind=FeatureKind.NUMERIC, values=np.arange(n, dtype=float)),
        FeatureColumn(id="b", kind=FeatureKind.NUMERIC, values=np.arange(n, dtype=float) ** 2),
        FeatureColumn(id="c", kind=FeatureKind.NUMERIC, values=np.ones(n)),
    ))
    config = DistanceConfig(features={"a": ["identity"], "b": ["identity"], "c": ["identity", "euclidean"]})
    context = make_context(dataset, config)
    rng = np.random.default_rng(0)
    rows = np.arange(n)
    drawn = Counter(usable_choices(rows, config, rng, context)[0] for _ in range(10_000))
    assert set(drawn) == {"a", "b"}
    assert drawn["a"] / 10_000 == pytest.approx(0.5, abs=0.02)


def test_usable_choices_none_when_nothing_varies():
    dataset = make_numeric_dataset([1.0, 1.0, 1.0])
    config = DistanceConfig(features={"x": ["identity", "manhattan"]})
    context = make_context(dataset, config)
    assert usable_choices(np.arange(3), config, np.random.default_rng(0), context) is None


def test_constant_goodall3_column_is_unusable(caplog):
    """Equal categories sit at a positive goodall3 distance but cannot be told apart."""
    dataset = Dataset(columns=(FeatureColumn(id="c", kind=FeatureKind.CATEGORICAL, values=["a"] * 16),))
    config = DistanceConfig(features={"c": ["goodall3"]})
    context = make_context(dataset, config)
    assert context.matrices[("c", DistanceId.GOODALL3)].row(0)[1] > 0.0
    assert usable_choices(np.arange(16), config, np.random.default_rng(0), context) is None

    with caplog.at_level(logging.WARNING, logger="src.forest.tree"):
        tree, _ = _grow(dataset, config, np.arange(16))
    assert isinstance(tree.root, Leaf)
    assert tree.root.size == 16
    assert not [record for record in caplog.records if record.levelno >= logging.WARNING]


def test_goodall3_column_with_two_categories_is_usable():
    dataset = Dataset(columns=(FeatureColumn(id="c", kind=FeatureKind.CATEGORICAL, values=["a"] * 6 + ["b"] * 2),))
    config = DistanceConfig(features={"c": ["goodall3"]})
    context = make_context(dataset, config)
    assert usable_choices(np.arange(8), config, np.random.default_rng(0), context) == ("c", DistanceId.GOODALL3)


def test_tree_json_keeps_routing(mixed_dataset, mixed_config):
    tree, context = _grow(mixed_dataset, mixed_config, np.arange(mixed_dataset.n))
    kinds = {fid: kind for fid, kind, _ in mixed_dataset.schema()}
    restored = RSITree.from_json(tree.to_json(kinds), kinds)
    for i in range(mixed_dataset.n):
        row = mixed_dataset.row(i)
        assert path_length(restored, row, context.stats) == path_length(tree, row, context.stats)


def test_malformed_tree_json():
    with pytest.raises(ModelFormatError, match="corrupt model"):
        RSITree.from_json({"max_depth": 3, "root": {"feature": "x"}}, {"x": FeatureKind.NUMERIC})
