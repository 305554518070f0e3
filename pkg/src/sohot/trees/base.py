"""Base learner interface"""

from abc import ABC, abstractmethod

import numpy as np
from pydantic import BaseModel


class TreeDiagnostics(BaseModel):
    """Structure of a tree at one point of the stream"""

    node_count: int
    leaf_count: int
    depth: int
    last_grad_output_norm: float | None = None

    @property
    def internal_count(self) -> int:
        return self.node_count - self.leaf_count


class Evaluation(BaseModel):
    """Prediction for one instance plus per-rule transparency counts"""

    model_config = {"arbitrary_types_allowed": True}

    proba: np.ndarray
    transparency_counts: list[int] = []


class StreamClassifier(ABC):
    """Base class for every incremental classifier"""

    n_features: int
    n_classes: int
    last_grad_output_norm: float | None = None

    @abstractmethod
    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Class probabilities for ``x`` without touching any state"""
        pass

    @abstractmethod
    def learn_one(self, x: np.ndarray, y: int) -> None:
        """Train on one labelled instance"""
        pass

    @abstractmethod
    def diagnostics(self) -> TreeDiagnostics:
        """Current structure counts"""
        pass

    @abstractmethod
    def dump(self) -> str:
        """Text dump of the model, one node per line"""
        pass

    def evaluate_one(self, x: np.ndarray) -> Evaluation:
        """Prediction used by the prequential loop

        Soft models override this to also report how many features matter
        for each decision rule the instance passes through.
        """
        return Evaluation(proba=self.predict_proba(x))
