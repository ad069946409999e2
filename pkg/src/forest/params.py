"""
Fit parameters and the per-feature distance configuration.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Tuple

from ..core import config as settings
from ..core.dataset import Dataset
from ..core.errors import ConfigError, DatasetError, DistanceError
from ..distances.registry import DistanceId, check_applicable
from .projection import SelectionStrategy


@dataclass(frozen=True)
class DistanceConfig:
    """
    Distances allowed per feature id (D_k), in configuration order.

    Features mapped to an empty list take no part in fitting.
    """

    features: Dict[str, Tuple[DistanceId, ...]] = field(default_factory=dict)

    def __post_init__(self):
        normalised = {}
        for feature_id, distances in dict(self.features).items():
            if isinstance(distances, str):
                distances = [distances]
            try:
                normalised[str(feature_id)] = tuple(DistanceId(d) for d in distances)
            except ValueError as e:
                raise ConfigError(f"feature '{feature_id}': {e}") from e
        object.__setattr__(self, "features", normalised)

    def items(self) -> Iterable[Tuple[str, Tuple[DistanceId, ...]]]:
        return self.features.items()

    def distances_for(self, feature_id: str) -> Tuple[DistanceId, ...]:
        return self.features.get(feature_id, ())

    @property
    def active_features(self) -> List[str]:
        return [feature_id for feature_id, distances in self.features.items() if distances]

    def validate(self, dataset: Dataset) -> None:
        """
        Check the configuration against a dataset.

        Raises:
            ConfigError: on an empty configuration, an unknown feature id, or a
            distance that does not apply to the feature's kind
        """
        if not self.active_features:
            raise ConfigError("distance configuration is empty")
        for feature_id, distances in self.features.items():
            try:
                column = dataset.column(feature_id)
            except DatasetError as e:
                raise ConfigError(f"unknown feature id '{feature_id}' in distance configuration") from e
            for distance_id in distances:
                try:
                    check_applicable(distance_id, column.kind, feature_id)
                except DistanceError as e:
                    raise ConfigError(str(e)) from e

    def to_json(self) -> Dict[str, List[str]]:
        return {feature_id: [d.value for d in distances] for feature_id, distances in self.features.items()}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "DistanceConfig":
        if not isinstance(obj, Mapping):
            raise ConfigError("distance configuration must map feature ids to lists of distances")
        return cls(features=dict(obj))


@dataclass(frozen=True)
class FitParams:
    """
    Hyperparameters of one forest.

    Args:
        config: Distances per feature
        t: Number of trees
        psi: Subsample size per tree
        m: Fraction of training examples in the reference pool
        strategy: Reference-pair selection strategy
        seed: Seed of every random draw in the fit
    """

    config: DistanceConfig
    t: int = settings.DEFAULT_TREES
    psi: int = settings.DEFAULT_SUBSAMPLE_SIZE
    m: float = settings.DEFAULT_POOL_RATIO
    strategy: SelectionStrategy = SelectionStrategy(settings.DEFAULT_STRATEGY)
    seed: int = settings.DEFAULT_SEED

    def __post_init__(self):
        if isinstance(self.config, Mapping):
            object.__setattr__(self, "config", DistanceConfig.from_json(self.config))
        try:
            object.__setattr__(self, "strategy", SelectionStrategy(self.strategy))
        except ValueError as e:
            raise ConfigError(f"unknown selection strategy '{self.strategy}'") from e
        if int(self.t) < 1:
            raise ConfigError(f"number of trees must be at least 1, got {self.t}")
        if int(self.psi) < 2:
            raise ConfigError(f"subsample size must be at least 2, got {self.psi}")
        if not 0.0 < float(self.m) <= 1.0:
            raise ConfigError(f"pool ratio must lie in (0, 1], got {self.m}")
        if int(self.seed) < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "psi", int(self.psi))
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "seed", int(self.seed))

    def replace(self, **changes: Any) -> "FitParams":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "psi": self.psi,
            "m": self.m,
            "strategy": self.strategy.value,
            "seed": self.seed,
            "config": self.config.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "FitParams":
        return cls(
            config=DistanceConfig.from_json(obj["config"]),
            t=obj["t"],
            psi=obj["psi"],
            m=obj["m"],
            strategy=obj["strategy"],
            seed=obj["seed"],
        )
