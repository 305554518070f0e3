"""Data models for sohot"""

from enum import Enum

from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Self


class ModelKind(str, Enum):
    """Supported learners"""

    SOHOT = "sohot"
    HT = "ht"
    HT_LIMIT = "ht-limit"
    ST = "st"
    POOL = "pool"


class LeafPrediction(str, Enum):
    """Hoeffding tree leaf predictors"""

    MAJORITY_CLASS = "mc"
    NAIVE_BAYES_ADAPTIVE = "nba"


class StreamKind(str, Enum):
    """Stream sources"""

    SEA = "sea"
    AGRAWAL = "agrawal"
    HYPERPLANE = "hyperplane"
    RBF = "rbf"
    CSV = "csv"


class DriftKind(str, Enum):
    """Drift schedules"""

    NONE = "none"
    ABRUPT = "abrupt"
    GRADUAL = "gradual"
    PERTURBATION = "perturbation"
    OVERSAMPLE = "oversample"


HT_LIMIT_DEFAULT = (2 ** (7 + 1) - 2) // 2


class SoHoTParams(BaseModel):
    """Soft Hoeffding tree hyperparameters"""

    alpha: float = Field(0.3, ge=0.0, le=1.0, description="Gate/split-test mix")
    gamma: float = Field(1.0, gt=0.0, description="Smooth-step width")
    max_depth: int = Field(7, ge=1, description="Leaves at this depth never split")
    delta: float = Field(1e-7, gt=0.0, lt=1.0, description="Hoeffding confidence")
    tau: float = Field(0.05, ge=0.0, description="Tie-break threshold")
    epsilon_s: float = Field(
        0.25, gt=0.0, le=1.0, description="Minimum reach probability for statistics"
    )
    grace_period: int = Field(200, ge=1, description="Observations between attempts")
    learning_rate: float = Field(1e-2, gt=0.0, description="Adam learning rate")
    normalize: bool = Field(default=True, description="Running input normalization")
    n_candidate_thresholds: int = Field(
        10, ge=1, description="Candidate thresholds per feature"
    )


class HoeffdingParams(BaseModel):
    """Hoeffding tree hyperparameters"""

    leaf_prediction: LeafPrediction = Field(
        LeafPrediction.NAIVE_BAYES_ADAPTIVE, description="Leaf predictor"
    )
    delta: float = Field(1e-7, gt=0.0, lt=1.0, description="Hoeffding confidence")
    tau: float = Field(0.05, ge=0.0, description="Tie-break threshold")
    grace_period: int = Field(200, ge=1, description="Observations between attempts")
    internal_node_limit: int | None = Field(
        None, ge=1, description="Maximum number of internal nodes (HT_limit)"
    )
    n_candidate_thresholds: int = Field(
        10, ge=1, description="Candidate thresholds per feature"
    )


class SoftTreeParams(BaseModel):
    """Fixed-topology soft tree hyperparameters"""

    depth: int = Field(7, ge=1, description="Depth of the complete tree")
    gamma: float = Field(1.0, gt=0.0, description="Smooth-step width")
    learning_rate: float = Field(1e-2, gt=0.0, description="Adam learning rate")
    normalize: bool = Field(default=True, description="Running input normalization")
    init_scale: float = Field(
        0.1, ge=0.0, description="Half-width of the uniform weight initialization"
    )


class PoolParams(BaseModel):
    """Model pool used for per-instance hyperparameter tuning"""

    model: ModelKind = Field(ModelKind.SOHOT, description="Kind of pooled model")
    decay: float = Field(0.99, gt=0.0, lt=1.0, description="Loss estimate decay")
    size: int | None = Field(
        None, ge=1, description="Use only the first N grid points"
    )

    @field_validator("model")
    @classmethod
    def validate_model(cls, v: ModelKind) -> ModelKind:
        """A pool cannot contain pools"""
        if v == ModelKind.POOL:
            msg = "pool model must be sohot, ht, ht-limit or st"
            raise ValueError(msg)
        return v


class DriftSpec(BaseModel):
    """Where and how the concept changes"""

    kind: DriftKind = Field(DriftKind.NONE, description="Drift schedule kind")
    positions: list[int] = Field(default_factory=list, description="Drift positions")
    width: int = Field(1, ge=1, description="Width of gradual drifts")
    perturbation: float = Field(
        0.1, ge=0.0, le=1.0, description="Feature noise fraction for perturbation"
    )
    contexts: int = Field(10, ge=1, description="Contexts for oversampling drift")
    majority_fraction: float = Field(
        0.75, gt=0.0, lt=1.0, description="Share of the context class when oversampling"
    )

    @field_validator("positions")
    @classmethod
    def validate_positions(cls, v: list[int]) -> list[int]:
        """Positions must be strictly increasing and non-negative"""
        if any(p < 0 for p in v):
            msg = "drift positions must be >= 0"
            raise ValueError(msg)
        if any(b <= a for a, b in zip(v, v[1:], strict=False)):
            msg = "drift positions must be strictly increasing"
            raise ValueError(msg)
        return v


class StreamSpec(BaseModel):
    """Declarative description of a stream"""

    kind: StreamKind = Field(StreamKind.SEA, description="Stream source")
    n_instances: int = Field(100_000, ge=1, description="Instances to emit")
    seed: int = Field(42, description="Base seed")
    drift: DriftSpec = Field(default_factory=DriftSpec)
    noise: float | None = Field(
        None, ge=0.0, le=1.0, description="Label noise (generator default if unset)"
    )

    # generator-specific
    sea_thresholds: list[float] = Field(
        default_factory=lambda: [8.0, 9.0, 7.0, 9.5],
        description="SEA concept thresholds, cycled across drifts",
    )
    agrawal_functions: list[int] = Field(
        default_factory=lambda: [1, 2],
        description="Agrawal classification functions, one per concept",
    )
    hyperplane_features: int = Field(10, ge=2, description="Hyperplane dimension")
    hyperplane_magnitude: float = Field(
        0.001, ge=0.0, description="Weight change per instance"
    )
    rbf_features: int = Field(10, ge=1, description="RBF dimension")
    rbf_classes: int = Field(5, ge=2, description="RBF classes")
    rbf_centroids: int = Field(50, ge=1, description="RBF centroids")
    rbf_speed: float = Field(0.001, ge=0.0, description="Centroid speed")

    # file-backed
    csv_path: str | None = Field(None, description="CSV file for kind=csv")
    label_column: str | None = Field(
        None, description="Label column name or index (last column if unset)"
    )
    shuffle: bool = Field(default=True, description="Shuffle CSV rows per repetition")

    @field_validator("agrawal_functions")
    @classmethod
    def validate_agrawal_functions(cls, v: list[int]) -> list[int]:
        """Agrawal defines functions 1 to 10"""
        if not v:
            msg = "agrawal_functions must not be empty"
            raise ValueError(msg)
        for f in v:
            if not 1 <= f <= 10:
                msg = f"Agrawal function index must be in 1..10, got {f}"
                raise ValueError(msg)
        return v

    @model_validator(mode="after")
    def validate_stream(self) -> Self:
        """Drift positions must fall inside the stream; csv needs a path"""
        if any(p >= self.n_instances for p in self.drift.positions):
            msg = "drift positions must be < n_instances"
            raise ValueError(msg)
        if self.kind == StreamKind.CSV and not self.csv_path:
            msg = "csv_path is required for kind=csv"
            raise ValueError(msg)
        return self


class PrequentialConfig(BaseModel):
    """Test-then-train protocol settings"""

    n_instances: int = Field(100_000, ge=1, description="Instances per repetition")
    window: int = Field(1000, ge=1, description="Metric window size")
    repetitions: int = Field(1, ge=1, description="Independent repetitions")
    base_seed: int = Field(42, description="Repetition r uses base_seed + r")
    auroc_capacity: int = Field(
        1_000_000, ge=1, description="Stream-level AUROC reservoir size"
    )
