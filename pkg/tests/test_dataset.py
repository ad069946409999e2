"""
Tests for the typed dataset model and its validation.
"""
import numpy as np
import pytest

from src.core.dataset import (
    Dataset,
    FeatureColumn,
    FeatureKind,
    GraphValue,
    HistogramValue,
    TimeSeriesValue,
    format_payload,
    parse_payload,
    validate,
)
from src.core.errors import DatasetError
from src.evaluation.synthetic import synth_gaussian, synth_multimodal
from tests.helpers import make_mixed_dataset, make_numeric_dataset


def test_valid_dataset_has_no_violations(mixed_dataset):
    """A well-formed dataset validates cleanly."""
    assert validate(mixed_dataset) == []


def test_histogram_masses_not_summing_to_one():
    """Bad masses produce one violation naming the column and example."""
    good = HistogramValue(positions=[0.0, 1.0], masses=[0.5, 0.5])
    bad = HistogramValue(positions=[0.0, 1.0], masses=[0.5, 0.4])
    dataset = Dataset(columns=(FeatureColumn(id="h", kind=FeatureKind.HISTOGRAM, values=[good, bad]),))
    violations = validate(dataset)
    assert len(violations) == 1
    assert "'h'" in violations[0]
    assert "example 1" in violations[0]


def test_label_length_mismatch():
    dataset = Dataset(columns=make_numeric_dataset([1.0, 2.0, 3.0]).columns, labels=[0, 1])
    violations = validate(dataset)
    assert len(violations) == 1
    assert "label length mismatch" in violations[0]


def test_duplicate_column_ids():
    column = FeatureColumn(id="x", kind=FeatureKind.NUMERIC, values=[[1.0], [2.0]])
    violations = validate(Dataset(columns=(column, column)))
    assert any("duplicate column id" in v for v in violations)


def test_numeric_column_must_have_dimension_one():
    column = FeatureColumn(id="x", kind=FeatureKind.NUMERIC, values=[[1.0, 2.0], [3.0, 4.0]])
    violations = validate(Dataset(columns=(column,)))
    assert any("dimension 2" in v for v in violations)


def test_ragged_vectors_rejected():
    with pytest.raises(DatasetError):
        FeatureColumn(id="v", kind=FeatureKind.VECTOR, values=[[1.0, 2.0], [3.0]])


def test_graph_edge_out_of_range():
    with pytest.raises(ValueError, match="edge endpoint out of range"):
        parse_payload(FeatureKind.GRAPH, '{"num_nodes":2,"edges":[[0,2]]}')


def test_graph_self_loop_rejected():
    with pytest.raises(ValueError, match="self-loop"):
        GraphValue.from_json({"num_nodes": 3, "edges": [[1, 1]]})


def test_graph_duplicate_edges_deduplicated():
    graph = GraphValue.from_json({"num_nodes": 3, "edges": [[0, 1], [1, 0], [1, 2]]})
    assert graph.edges == ((0, 1), (1, 2))
    assert list(graph.degree_histogram) == [0.0, 2.0, 1.0]


def test_timeseries_problems():
    assert TimeSeriesValue([]).problems() == ["time series is empty"]
    assert TimeSeriesValue([1.0, np.nan]).problems()
    assert TimeSeriesValue([0.5]).problems() == []


def test_missing_values_rejected():
    with pytest.raises(ValueError):
        parse_payload(FeatureKind.NUMERIC, "")
    with pytest.raises(ValueError):
        parse_payload(FeatureKind.CATEGORICAL, "")
    with pytest.raises(ValueError):
        parse_payload(FeatureKind.VECTOR, "1.0,nan")


def test_format_then_parse_is_exact():
    """Payload text form keeps every float bit."""
    value = np.array([0.1, 1.0 / 3.0, -2.5e-300])
    parsed = parse_payload(FeatureKind.VECTOR, format_payload(FeatureKind.VECTOR, value))
    assert np.array_equal(parsed, value)


def test_take_keeps_labels_with_rows():
    dataset = make_mixed_dataset(n=10, labels=True)
    subset = dataset.take([3, 0])
    assert subset.n == 2
    assert list(subset.labels) == [int(dataset.labels[3]), int(dataset.labels[0])]
    assert subset.column("cat").values[0] == dataset.column("cat").values[3]


def test_split_vector_column():
    dataset = synth_gaussian(40, 0.1, dims=3, seed=1)
    split = dataset.split_vector_column("x")
    assert split.column_ids == ["x_0", "x_1", "x_2"]
    assert all(kind is FeatureKind.NUMERIC for _, kind, _ in split.schema())
    assert np.array_equal(split.column("x_2").values[:, 0], dataset.column("x").values[:, 2])


def test_unknown_column():
    with pytest.raises(DatasetError, match="unknown column"):
        make_numeric_dataset([1.0, 2.0]).column("nope")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_synthetic_datasets_validate(seed):
    assert validate(synth_gaussian(100, 0.05, dims=2, seed=seed)) == []
    assert validate(synth_multimodal(100, 0.05, seed=seed)) == []
