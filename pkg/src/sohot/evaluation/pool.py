"""Per-instance hyperparameter tuning with a pool of models

Every member predicts every instance. The member with the lowest decayed
loss estimate serves the prediction, all estimates are updated with the
members' own losses, and the half of the pool with the lowest estimates is
trained.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from sohot.core.numerics import log_loss
from sohot.models import ModelKind
from sohot.trees.base import Evaluation, StreamClassifier, TreeDiagnostics

logger = logging.getLogger(__name__)

SOHOT_GRID: dict[str, list[Any]] = {
    "max_depth": [5, 6, 7],
    "gamma": [1.0, 0.1],
    "alpha": [0.2, 0.3, 0.4],
}
HYPERPLANE_GAMMAS = [0.5, 0.1]
HT_GRID: dict[str, list[Any]] = {
    "leaf_prediction": ["mc", "nba"],
    "delta": [1e-6, 1e-7, 1e-8],
    "grace_period": [200, 400, 600],
}
ST_GRID: dict[str, list[Any]] = {
    "depth": [5, 6, 7],
    "gamma": [1.0, 0.1, 0.01],
    "learning_rate": [1e-2, 1e-3],
}


def hyperparameter_grid(
    kind: ModelKind, *, hyperplane: bool = False, size: int | None = None
) -> list[dict[str, Any]]:
    """Grid points in order; ``size`` keeps only the first ones"""
    if kind == ModelKind.SOHOT:
        grid = dict(SOHOT_GRID)
        if hyperplane:
            grid["gamma"] = HYPERPLANE_GAMMAS
    elif kind in (ModelKind.HT, ModelKind.HT_LIMIT):
        grid = HT_GRID
    elif kind == ModelKind.ST:
        grid = ST_GRID
    else:
        msg = f"no hyperparameter grid for model kind {kind.value}"
        raise ValueError(msg)
    keys = list(grid)
    points = [
        dict(zip(keys, values, strict=True))
        for values in itertools.product(*grid.values())
    ]
    return points[:size] if size is not None else points


def decayed_estimate(estimate: float, loss: float, decay: float) -> float:
    """Exponentially decayed loss estimate; an infinite estimate takes the loss"""
    if math.isinf(estimate):
        return loss
    return decay * estimate + (1.0 - decay) * loss


@dataclass
class PoolStep:
    """Which member served and which members were trained for one instance"""

    served: int
    trained: list[int]
    estimates_before: np.ndarray


class ModelPool(StreamClassifier):
    """Pool of differently configured members of one model kind"""

    def __init__(
        self,
        members: list[StreamClassifier],
        decay: float = 0.99,
        assignments: list[dict[str, Any]] | None = None,
    ) -> None:
        if not members:
            msg = "pool needs at least one member"
            raise ValueError(msg)
        self.members = members
        self.decay = decay
        self.assignments = assignments or []
        self.n_features = members[0].n_features
        self.n_classes = members[0].n_classes
        self.estimates = np.full(len(members), np.inf)
        self.last_step: PoolStep | None = None
        self._cache: tuple[np.ndarray, list[Evaluation]] | None = None
        self._served = 0

    def __len__(self) -> int:
        return len(self.members)

    @property
    def serving_index(self) -> int:
        """Lowest estimate; ties go to the lowest member index"""
        return int(np.argmin(self.estimates))

    @property
    def n_trained(self) -> int:
        return math.ceil(len(self.members) / 2)

    @property
    def last_grad_output_norm(self) -> float | None:  # type: ignore[override]
        return self.members[self.serving_index].last_grad_output_norm

    def _evaluate_members(self, x: np.ndarray) -> list[Evaluation]:
        if self._cache is not None and np.array_equal(self._cache[0], x):
            return self._cache[1]
        evaluations = [m.evaluate_one(x) for m in self.members]
        self._cache = (np.array(x, dtype=float, copy=True), evaluations)
        return evaluations

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.members[self.serving_index].predict_proba(x)

    def evaluate_one(self, x: np.ndarray) -> Evaluation:
        return self._evaluate_members(x)[self.serving_index]

    def learn_one(self, x: np.ndarray, y: int) -> None:
        evaluations = self._evaluate_members(x)
        self._cache = None
        served = self.serving_index
        before = self.estimates.copy()

        for i, evaluation in enumerate(evaluations):
            loss = log_loss(evaluation.proba, y)
            self.estimates[i] = decayed_estimate(self.estimates[i], loss, self.decay)

        order = np.argsort(self.estimates, kind="stable")
        trained = sorted(int(i) for i in order[: self.n_trained])
        for i in trained:
            self.members[i].learn_one(x, y)

        if self.serving_index != self._served:
            logger.debug(
                "Pool member %d now serves (estimate %.4f)",
                self.serving_index,
                self.estimates[self.serving_index],
            )
            self._served = self.serving_index
        self.last_step = PoolStep(served=served, trained=trained, estimates_before=before)

    def diagnostics(self) -> TreeDiagnostics:
        return self.members[self.serving_index].diagnostics()

    def dump(self) -> str:
        served = self.serving_index
        assignment = self.assignments[served] if self.assignments else {}
        header = f"# pool member {served} of {len(self.members)} {assignment}\n"
        return header + self.members[served].dump()


def pool_predict_train(pool: ModelPool, x: np.ndarray, y: int) -> np.ndarray:
    """Probabilities of the serving member, then one pool training step"""
    evaluation = pool.evaluate_one(x)
    pool.learn_one(x, y)
    return evaluation.proba
