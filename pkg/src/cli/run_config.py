"""
Run configuration file schema.
"""
import json
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core import config
from ..core.errors import ConfigError
from ..distances.registry import DistanceId
from ..forest.params import DistanceConfig, FitParams
from ..forest.projection import SelectionStrategy


class RunConfig(BaseModel):
    """
    JSON run configuration: hyperparameters, distances per feature, and
    optional candidate distance sets for validation-based selection.
    """

    model_config = ConfigDict(extra="forbid")

    t: int = Field(config.DEFAULT_TREES, ge=1, description="Number of trees")
    psi: int = Field(config.DEFAULT_SUBSAMPLE_SIZE, ge=2, description="Subsample size per tree")
    m: float = Field(config.DEFAULT_POOL_RATIO, gt=0.0, le=1.0, description="Reference pool ratio")
    strategy: SelectionStrategy = Field(SelectionStrategy(config.DEFAULT_STRATEGY))
    seed: int = Field(config.DEFAULT_SEED, ge=0)
    theta: Optional[float] = Field(None, description="Default decision threshold")
    distances: Dict[str, List[DistanceId]] = Field(default_factory=dict)
    candidates: Optional[List[Dict[str, List[DistanceId]]]] = None

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        return cls.model_validate(raw)

    def candidate_configs(self) -> List[DistanceConfig]:
        return [DistanceConfig(features=dict(candidate)) for candidate in self.candidates or []]

    def distance_config(self) -> DistanceConfig:
        """The configured distances, or the first candidate when none are given."""
        if self.distances:
            return DistanceConfig(features=dict(self.distances))
        candidates = self.candidate_configs()
        if candidates:
            return candidates[0]
        raise ConfigError("distance configuration is empty")

    def fit_params(self) -> FitParams:
        return FitParams(
            config=self.distance_config(),
            t=self.t,
            psi=self.psi,
            m=self.m,
            strategy=self.strategy,
            seed=self.seed,
        )
