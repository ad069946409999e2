"""
Random Similarity Isolation Trees.

Each internal node splits the examples reaching it on a dynamic feature: the
projection of a randomly chosen (feature, distance) pair onto a reference
pair, thresholded at a uniform random point strictly inside the observed
range. Examples with P <= threshold go left.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core import config as settings
from ..core.dataset import Dataset, FeatureKind, payload_from_json, payload_to_json
from ..core.errors import DegeneratePairError, ModelFormatError
from ..distances.categorical import CategoricalStats
from ..distances.registry import DistanceId, DistanceMatrix
from .params import DistanceConfig
from .projection import (
    ReferencePair,
    SelectionStrategy,
    payloads_differ,
    project,
    project_column,
    reference_candidates,
    select_pair,
)
from .scoring import avg_path_c

logger = logging.getLogger(__name__)

MatrixKey = Tuple[str, DistanceId]


@dataclass(frozen=True, eq=False)
class Leaf:
    size: int
    depth: int

    @property
    def path_length(self) -> float:
        return self.depth + avg_path_c(self.size)


@dataclass(frozen=True, eq=False)
class InternalNode:
    pair: ReferencePair
    threshold: float
    left: "TreeNode"
    right: "TreeNode"

    @property
    def feature_id(self) -> str:
        return self.pair.feature_id

    @property
    def distance_id(self) -> DistanceId:
        return self.pair.distance_id


TreeNode = Union[Leaf, InternalNode]


@dataclass(frozen=True, eq=False)
class SplitContext:
    """
    Read-only training state shared by every tree of one fit.

    Args:
        dataset: Training data
        pool: Sorted reference pool indices
        matrices: Pool-by-example distances per (feature, distance)
        stats: Categorical counts per categorical feature
        global_pairs: Most distant pool pairs per (feature, distance), global strategy only
    """

    dataset: Dataset
    pool: np.ndarray
    matrices: Dict[MatrixKey, DistanceMatrix] = field(default_factory=dict)
    stats: Dict[str, CategoricalStats] = field(default_factory=dict)
    global_pairs: Dict[MatrixKey, List[Tuple[int, int]]] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class RSITree:
    root: TreeNode
    max_depth: int
    subsample_size: int

    def nodes(self) -> List[TreeNode]:
        found, stack = [], [self.root]
        while stack:
            node = stack.pop()
            found.append(node)
            if isinstance(node, InternalNode):
                stack.extend((node.right, node.left))
        return found

    def leaves(self) -> List[Leaf]:
        return [node for node in self.nodes() if isinstance(node, Leaf)]

    def internal_nodes(self) -> List[InternalNode]:
        return [node for node in self.nodes() if isinstance(node, InternalNode)]

    @property
    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def leaf_for(self, example: Mapping[str, Any], stats: Optional[Mapping[str, CategoricalStats]] = None) -> Leaf:
        """
        Route one example from the root to its leaf.

        Args:
            example: Payloads keyed by feature id
            stats: Categorical counts of the fitted model

        Returns:
            Leaf: The leaf the example lands in
        """
        stats = stats or {}
        node = self.root
        while isinstance(node, InternalNode):
            p = project(example[node.feature_id], node.pair, stats.get(node.feature_id))
            node = node.left if p <= node.threshold else node.right
        return node

    def to_json(self, kinds: Mapping[str, FeatureKind]) -> Dict[str, Any]:
        return {
            "max_depth": self.max_depth,
            "subsample_size": self.subsample_size,
            "root": _node_to_json(self.root, kinds),
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any], kinds: Mapping[str, FeatureKind]) -> "RSITree":
        try:
            return cls(
                root=_node_from_json(obj["root"], kinds),
                max_depth=int(obj["max_depth"]),
                subsample_size=int(obj["subsample_size"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ModelFormatError(f"corrupt model: malformed tree ({e})") from e


def _node_to_json(node: TreeNode, kinds: Mapping[str, FeatureKind]) -> Dict[str, Any]:
    if isinstance(node, Leaf):
        return {"size": node.size, "depth": node.depth}
    pair = node.pair
    kind = kinds[pair.feature_id]
    return {
        "feature": pair.feature_id,
        "distance": pair.distance_id.value,
        "threshold": float(node.threshold),
        "q": None if pair.is_identity else payload_to_json(kind, pair.q_value),
        "r": None if pair.is_identity else payload_to_json(kind, pair.r_value),
        "q_index": pair.q_index,
        "r_index": pair.r_index,
        "left": _node_to_json(node.left, kinds),
        "right": _node_to_json(node.right, kinds),
    }


def _node_from_json(obj: Mapping[str, Any], kinds: Mapping[str, FeatureKind]) -> TreeNode:
    if "size" in obj:
        return Leaf(size=int(obj["size"]), depth=int(obj["depth"]))
    feature_id = obj["feature"]
    distance_id = DistanceId(obj["distance"])
    if distance_id is DistanceId.IDENTITY:
        pair = ReferencePair.identity(feature_id)
    else:
        kind = kinds[feature_id]
        pair = ReferencePair(
            feature_id=feature_id,
            distance_id=distance_id,
            q_value=payload_from_json(kind, obj["q"]),
            r_value=payload_from_json(kind, obj["r"]),
            q_index=int(obj.get("q_index", -1)),
            r_index=int(obj.get("r_index", -1)),
        )
    return InternalNode(
        pair=pair,
        threshold=float(obj["threshold"]),
        left=_node_from_json(obj["left"], kinds),
        right=_node_from_json(obj["right"], kinds),
    )


def random_threshold(projections: np.ndarray, rng: np.random.Generator) -> float:
    """
    Uniform threshold strictly between the smallest and largest projection.

    When no float lies strictly inside the range (adjacent doubles) or the
    redraws run out, the smallest projection is returned; P <= threshold
    still leaves both children non-empty.

    Raises:
        DegeneratePairError: if the projection is constant
    """
    lo, hi = float(np.min(projections)), float(np.max(projections))
    if not hi > lo:
        raise DegeneratePairError("constant projection cannot be split")
    if np.nextafter(lo, hi) == hi:
        return lo
    for _ in range(settings.MAX_THRESHOLD_DRAWS):
        threshold = float(rng.uniform(lo, hi))
        if lo < threshold < hi:
            return threshold
    return lo


def _sample_pairs(members: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    if len(members) <= settings.USABILITY_EXHAUSTIVE_LIMIT:
        i, j = np.triu_indices(len(members), k=1)
        return members[i], members[j]
    a = rng.choice(members, size=settings.USABILITY_PAIRS)
    b = rng.choice(members, size=settings.USABILITY_PAIRS)
    return a, b


def _feature_usable(feature_id: str, distances: Sequence[DistanceId], rows: np.ndarray,
                    rng: np.random.Generator, context: SplitContext) -> bool:
    column = context.dataset.column(feature_id)
    members = None
    for distance_id in distances:
        if distance_id is DistanceId.IDENTITY:
            values = column.values[rows, 0]
            if values.max() > values.min():
                return True
            continue
        if members is None:
            members = reference_candidates(rows, context.pool)
        if len(members) < 2:
            continue
        a, b = _sample_pairs(members, rng)
        if np.any(payloads_differ(column, context.matrices[(feature_id, distance_id)], a, b)):
            return True
    return False


def usable_choices(rows: np.ndarray, config: DistanceConfig, rng: np.random.Generator,
                   context: SplitContext) -> Optional[Tuple[str, DistanceId]]:
    """
    Draw a (feature, distance) pair among features that can still separate the node.

    A feature is usable when some configured distance sees a difference: a
    non-constant value under identity, or two sampled pool members reaching the
    node that the distance tells apart.

    Returns:
        Optional[Tuple[str, DistanceId]]: Uniform feature, then uniform distance; None if nothing is usable
    """
    usable = [
        feature_id for feature_id, distances in config.items()
        if distances and _feature_usable(feature_id, distances, rows, rng, context)
    ]
    if not usable:
        return None
    feature_id = usable[rng.integers(len(usable))]
    distances = config.distances_for(feature_id)
    return feature_id, distances[rng.integers(len(distances))]


def _try_split(rows: np.ndarray, config: DistanceConfig, strategy: SelectionStrategy,
               rng: np.random.Generator, context: SplitContext) -> Optional[Tuple[ReferencePair, float, np.ndarray]]:
    for attempt in range(settings.MAX_SPLIT_RETRIES):
        choice = usable_choices(rows, config, rng, context)
        if choice is None:
            return None
        feature_id, distance_id = choice
        column = context.dataset.column(feature_id)
        if distance_id is DistanceId.IDENTITY:
            pair = ReferencePair.identity(feature_id)
            projections = project_column(column.values[rows], pair)
        else:
            key = (feature_id, distance_id)
            matrix = context.matrices[key]
            try:
                pair = select_pair(strategy, rows, context.pool, column, matrix, rng, context.global_pairs.get(key))
            except DegeneratePairError as e:
                logger.debug(f"Split attempt {attempt + 1} on {feature_id}/{distance_id.value} rejected: {e}")
                continue
            projections = project_column(column.values[rows], pair, matrix=matrix, positions=rows)
        if not projections.max() > projections.min():
            continue
        threshold = random_threshold(projections, rng)
        return pair, threshold, projections <= threshold
    logger.warning(f"No valid split after {settings.MAX_SPLIT_RETRIES} attempts on {len(rows)} examples; making a leaf")
    return None


def build_tree(subsample: Sequence[int], config: DistanceConfig, strategy: SelectionStrategy,
               max_depth: int, rng: np.random.Generator, context: SplitContext) -> RSITree:
    """
    Grow one tree on a subsample of the training data.

    Args:
        subsample: Training indices drawn for this tree
        config: Distances per feature
        strategy: Reference-pair selection strategy
        max_depth: Depth at which nodes become leaves
        rng: Generator owned by this tree
        context: Shared training state (dataset, pool, matrices, stats)

    Returns:
        RSITree: Tree whose leaf sizes sum to the subsample size
    """
    rows = np.sort(np.asarray(subsample, dtype=int))

    def grow(node_rows: np.ndarray, depth: int) -> TreeNode:
        if depth >= max_depth or len(node_rows) <= 1:
            return Leaf(size=len(node_rows), depth=depth)
        split = _try_split(node_rows, config, strategy, rng, context)
        if split is None:
            return Leaf(size=len(node_rows), depth=depth)
        pair, threshold, goes_left = split
        return InternalNode(
            pair=pair,
            threshold=threshold,
            left=grow(node_rows[goes_left], depth + 1),
            right=grow(node_rows[~goes_left], depth + 1),
        )

    return RSITree(root=grow(rows, 0), max_depth=max_depth, subsample_size=len(rows))


def path_length(tree: RSITree, example: Mapping[str, Any],
                stats: Optional[Mapping[str, CategoricalStats]] = None) -> float:
    """Depth of the example's leaf plus c(leaf size)."""
    return tree.leaf_for(example, stats).path_length


def path_lengths(tree: RSITree, project_rows: Callable[[ReferencePair, np.ndarray], np.ndarray],
                 n: int) -> np.ndarray:
    """
    Path lengths of a whole batch, routing index sets instead of single rows.

    Args:
        tree: Fitted tree
        project_rows: Projection of the batch rows at the given indices onto a pair
        n: Batch size

    Returns:
        np.ndarray: n path lengths, equal to path_length row by row
    """
    out = np.empty(n, dtype=float)
    stack = [(tree.root, np.arange(n))]
    while stack:
        node, rows = stack.pop()
        if not rows.size:
            continue
        if isinstance(node, Leaf):
            out[rows] = node.path_length
            continue
        goes_left = project_rows(node.pair, rows) <= node.threshold
        stack.append((node.left, rows[goes_left]))
        stack.append((node.right, rows[~goes_left]))
    return out
