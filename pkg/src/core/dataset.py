"""
Typed in-memory representation of heterogeneous (multi-modal) datasets.

A dataset is a tuple of feature columns sharing one row count. Every column
declares one FeatureKind; numeric and vector columns hold a float matrix of
shape (n, d) (numeric is the d == 1 case), every other kind holds an object
array of payload values.
"""
import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from . import config
from .errors import DatasetError


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    VECTOR = "vector"
    CATEGORICAL = "categorical"
    HISTOGRAM = "histogram"
    TIMESERIES = "timeseries"
    GRAPH = "graph"

    @property
    def is_vector(self) -> bool:
        """True for kinds stored as float matrices."""
        return self in (FeatureKind.NUMERIC, FeatureKind.VECTOR)


@dataclass(frozen=True, eq=False)
class HistogramValue:
    """Weighted point histogram: masses placed at strictly increasing positions."""

    positions: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).ravel())
        object.__setattr__(self, "masses", np.asarray(self.masses, dtype=float).ravel())

    def problems(self) -> List[str]:
        """
        Check the histogram invariants.

        Returns:
            List[str]: Human-readable problems, empty when the histogram is valid
        """
        if len(self.positions) == 0:
            return ["histogram has no bins"]
        if len(self.positions) != len(self.masses):
            return [f"histogram has {len(self.positions)} positions but {len(self.masses)} masses"]
        issues = []
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.masses))):
            issues.append("histogram contains non-finite values")
        elif np.any(np.diff(self.positions) <= 0):
            issues.append("histogram positions are not strictly increasing")
        if np.any(self.masses < 0):
            issues.append("histogram has negative masses")
        total = float(np.sum(self.masses))
        if not abs(total - 1.0) <= config.HISTOGRAM_MASS_TOLERANCE:
            issues.append(f"histogram masses sum to {total!r}, expected 1")
        return issues

    def to_json(self) -> Dict[str, List[float]]:
        return {"positions": [float(p) for p in self.positions], "masses": [float(m) for m in self.masses]}

    @classmethod
    def from_json(cls, obj: Any) -> "HistogramValue":
        if not isinstance(obj, dict) or set(obj) != {"positions", "masses"}:
            raise ValueError('histogram must be an object with keys "positions" and "masses"')
        return cls(positions=_float_list(obj["positions"]), masses=_float_list(obj["masses"]))


@dataclass(frozen=True, eq=False)
class TimeSeriesValue:
    """Finite real sequence of length at least one."""

    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float).ravel())

    def __len__(self) -> int:
        return len(self.samples)

    def problems(self) -> List[str]:
        if len(self.samples) == 0:
            return ["time series is empty"]
        if not np.all(np.isfinite(self.samples)):
            return ["time series contains non-finite samples"]
        return []


@dataclass(frozen=True, eq=False)
class GraphValue:
    """Simple undirected graph over nodes 0 .. num_nodes - 1."""

    num_nodes: int
    edges: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))

    def problems(self) -> List[str]:
        if self.num_nodes < 1:
            return [f"graph must have at least one node, got {self.num_nodes}"]
        issues = []
        seen = set()
        for a, b in self.edges:
            if not (0 <= a < self.num_nodes and 0 <= b < self.num_nodes):
                issues.append(f"edge endpoint out of range: [{a}, {b}] with num_nodes={self.num_nodes}")
            elif a == b:
                issues.append(f"self-loop on node {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                issues.append(f"duplicate edge [{a}, {b}]")
            seen.add(key)
        return issues

    @cached_property
    def degree_histogram(self) -> np.ndarray:
        """Count of nodes per degree (index = degree)."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.num_nodes))
        graph.add_edges_from(self.edges)
        return np.asarray(nx.degree_histogram(graph), dtype=float)

    def to_json(self) -> Dict[str, Any]:
        return {"num_nodes": self.num_nodes, "edges": [[a, b] for a, b in self.edges]}

    @classmethod
    def from_json(cls, obj: Any) -> "GraphValue":
        """
        Build a graph from its JSON form, deduplicating edges.

        Raises:
            ValueError: on self-loops, out-of-range endpoints or malformed input
        """
        if not isinstance(obj, dict) or set(obj) != {"num_nodes", "edges"}:
            raise ValueError('graph must be an object with keys "num_nodes" and "edges"')
        num_nodes = obj["num_nodes"]
        if not isinstance(num_nodes, int) or isinstance(num_nodes, bool) or num_nodes < 1:
            raise ValueError(f"num_nodes must be a positive integer, got {num_nodes!r}")
        edges = []
        seen = set()
        for edge in obj["edges"]:
            if not isinstance(edge, list) or len(edge) != 2 or not all(isinstance(v, int) for v in edge):
                raise ValueError(f"edge must be a pair of integers, got {edge!r}")
            a, b = edge
            if not (0 <= a < num_nodes and 0 <= b < num_nodes):
                raise ValueError(f"edge endpoint out of range: [{a}, {b}] with num_nodes={num_nodes}")
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen.add(key)
                edges.append(key)
        return cls(num_nodes=num_nodes, edges=tuple(edges))


def _float_list(raw: Any) -> List[float]:
    if not isinstance(raw, list):
        raise ValueError(f"expected a list of numbers, got {raw!r}")
    values = [float(v) for v in raw]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("missing or non-finite value")
    return values


def _parse_floats(text: str) -> List[float]:
    if not text.strip():
        raise ValueError("missing value")
    values = [float(token) for token in text.split(",")]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("missing or non-finite value")
    return values


def parse_payload(kind: FeatureKind, text: str) -> Any:
    """
    Parse one line of a column file.

    Args:
        kind: Column kind
        text: Line content without the trailing newline

    Returns:
        Any: Payload for the kind (float vector, string or value object)

    Raises:
        ValueError: if the line does not hold a valid payload of that kind
    """
    if kind.is_vector:
        values = _parse_floats(text)
        if kind is FeatureKind.NUMERIC and len(values) != 1:
            raise ValueError(f"numeric value expected, got {len(values)} components")
        return np.asarray(values, dtype=float)
    if kind is FeatureKind.CATEGORICAL:
        if text == "":
            raise ValueError("missing value")
        return text
    if kind is FeatureKind.TIMESERIES:
        return TimeSeriesValue(_parse_floats(text))
    obj = json.loads(text)
    if kind is FeatureKind.HISTOGRAM:
        value = HistogramValue.from_json(obj)
        issues = value.problems()
        if issues:
            raise ValueError(issues[0])
        return value
    return GraphValue.from_json(obj)


def format_payload(kind: FeatureKind, value: Any) -> str:
    """Inverse of parse_payload; floats use their shortest round-trip form."""
    if kind.is_vector:
        return ",".join(repr(float(v)) for v in np.ravel(value))
    if kind is FeatureKind.CATEGORICAL:
        return str(value)
    if kind is FeatureKind.TIMESERIES:
        return ",".join(repr(float(v)) for v in value.samples)
    return json.dumps(value.to_json())


def payload_to_json(kind: FeatureKind, value: Any) -> Any:
    """JSON-compatible form of a payload, used by the model file."""
    if kind.is_vector:
        return [float(v) for v in np.ravel(value)]
    if kind is FeatureKind.CATEGORICAL:
        return str(value)
    if kind is FeatureKind.TIMESERIES:
        return [float(v) for v in value.samples]
    return value.to_json()


def payload_from_json(kind: FeatureKind, obj: Any) -> Any:
    if kind.is_vector:
        return np.asarray(obj, dtype=float)
    if kind is FeatureKind.CATEGORICAL:
        return str(obj)
    if kind is FeatureKind.TIMESERIES:
        return TimeSeriesValue(obj)
    if kind is FeatureKind.HISTOGRAM:
        return HistogramValue.from_json(obj)
    return GraphValue.from_json(obj)


@dataclass(frozen=True, eq=False)
class FeatureColumn:
    """
    One feature of the dataset (F_k).

    Numeric and vector values are a float matrix of shape (n, d); other kinds
    are an object array with one payload per example.
    """

    id: str
    kind: FeatureKind
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        kind = FeatureKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not self.name:
            object.__setattr__(self, "name", self.id)
        if kind.is_vector:
            try:
                values = np.asarray(self.values, dtype=float)
            except ValueError as e:
                raise DatasetError(f"column '{self.id}': vectors must share one dimensionality") from e
            if values.ndim == 1:
                values = values.reshape(-1, 1)
            if values.ndim != 2:
                raise DatasetError(f"column '{self.id}': expected a 2-D array of vectors")
        else:
            raw = list(self.values)
            values = np.empty(len(raw), dtype=object)
            for i, value in enumerate(raw):
                if kind is FeatureKind.TIMESERIES and not isinstance(value, TimeSeriesValue):
                    value = TimeSeriesValue(value)
                values[i] = value
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> Optional[int]:
        """Vector dimensionality, None for non-vector kinds."""
        return int(self.values.shape[1]) if self.kind.is_vector else None

    def payload(self, index: int) -> Any:
        return self.values[index]

    def take(self, indices: Sequence[int]) -> "FeatureColumn":
        return FeatureColumn(id=self.id, kind=self.kind, values=self.values[np.asarray(indices, dtype=int)], name=self.name)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Collection of typed feature columns plus optional 0/1 outlier labels.

    Labels are only consulted by the evaluation protocol; fitting and scoring
    ignore them.
    """

    columns: Tuple[FeatureColumn, ...]
    labels: Optional[np.ndarray] = None
    name: str = "dataset"
    n: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if self.n is None:
            object.__setattr__(self, "n", len(self.columns[0]) if self.columns else 0)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int).ravel())

    @property
    def column_ids(self) -> List[str]:
        return [column.id for column in self.columns]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def column(self, column_id: str) -> FeatureColumn:
        for column in self.columns:
            if column.id == column_id:
                return column
        raise DatasetError(f"unknown column '{column_id}'")

    def row(self, index: int) -> Dict[str, Any]:
        """Payloads of one example keyed by column id."""
        return {column.id: column.payload(index) for column in self.columns}

    def take(self, indices: Sequence[int]) -> "Dataset":
        """Subset of rows, in the given order; labels follow their rows."""
        indices = np.asarray(indices, dtype=int)
        labels = self.labels[indices] if self.labels is not None else None
        return Dataset(
            columns=tuple(column.take(indices) for column in self.columns),
            labels=labels,
            name=self.name,
            n=len(indices),
        )

    def without_labels(self) -> "Dataset":
        return Dataset(columns=self.columns, labels=None, name=self.name, n=self.n)

    def schema(self) -> List[Tuple[str, FeatureKind, Optional[int]]]:
        """(id, kind, dimension) for every column."""
        return [(column.id, column.kind, column.dim) for column in self.columns]

    def split_vector_column(self, column_id: str) -> "Dataset":
        """
        Replace a vector column of dimension d with d numeric columns.

        Args:
            column_id: Vector column to split

        Returns:
            Dataset: Copy where column `<id>` became `<id>_0` .. `<id>_{d-1}`
        """
        source = self.column(column_id)
        if not source.kind.is_vector:
            raise DatasetError(f"column '{column_id}' is {source.kind.value}, not a vector column")
        columns: List[FeatureColumn] = []
        for column in self.columns:
            if column.id != column_id:
                columns.append(column)
                continue
            for k in range(source.dim):
                columns.append(FeatureColumn(
                    id=f"{column_id}_{k}",
                    kind=FeatureKind.NUMERIC,
                    values=source.values[:, k:k + 1].copy(),
                ))
        return Dataset(columns=tuple(columns), labels=self.labels, name=self.name, n=self.n)


def _payload_problems(kind: FeatureKind, value: Any) -> List[str]:
    if kind is FeatureKind.CATEGORICAL:
        if not isinstance(value, str) or value == "":
            return [f"categorical value must be a non-empty string, got {value!r}"]
        return []
    expected = {
        FeatureKind.HISTOGRAM: HistogramValue,
        FeatureKind.TIMESERIES: TimeSeriesValue,
        FeatureKind.GRAPH: GraphValue,
    }[kind]
    if not isinstance(value, expected):
        return [f"expected {kind.value} payload, got {type(value).__name__}"]
    return value.problems()


def validate(dataset: Dataset) -> List[str]:
    """
    Check every dataset invariant.

    Args:
        dataset: Dataset to check

    Returns:
        List[str]: Violations, each naming the column (and example index where relevant);
        empty when the dataset is valid
    """
    violations = []
    seen = set()
    for column in dataset.columns:
        if column.id in seen:
            violations.append(f"duplicate column id '{column.id}'")
        seen.add(column.id)

        if len(column) != dataset.n:
            violations.append(f"column '{column.id}': length {len(column)} does not match n={dataset.n}")

        if column.kind.is_vector:
            if column.kind is FeatureKind.NUMERIC and column.dim != 1:
                violations.append(f"column '{column.id}': numeric column has dimension {column.dim}")
            if column.dim is not None and column.dim < 1:
                violations.append(f"column '{column.id}': vectors have dimension 0")
            bad_rows = np.flatnonzero(~np.all(np.isfinite(column.values), axis=1))
            for i in bad_rows:
                violations.append(f"column '{column.id}' example {i}: missing or non-finite value")
            continue

        for i, value in enumerate(column.values):
            for problem in _payload_problems(column.kind, value):
                violations.append(f"column '{column.id}' example {i}: {problem}")

    if dataset.labels is not None:
        if len(dataset.labels) != dataset.n:
            violations.append(f"label length mismatch: {len(dataset.labels)} labels for n={dataset.n}")
        if not np.all(np.isin(dataset.labels, (0, 1))):
            violations.append("labels must be 0 (inlier) or 1 (outlier)")
    return violations
