"""Streaming stand-in for a batch normalization layer"""

from dataclasses import dataclass, field

import numpy as np

from sohot.core.numerics import check_length

VARIANCE_FLOOR = 1e-5


@dataclass
class RunningNormalizer:
    """Exponential moving estimate of per-feature mean and variance

    Until ``1 / (1 - momentum)`` instances have been seen the update weight
    is ``1 / count``, so early estimates equal the plain sample mean and
    (population) variance instead of being dominated by the first instance.
    """

    size: int
    momentum: float = 0.99
    count: int = 0
    running_mean: np.ndarray = field(init=False)
    running_variance: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not 0 < self.momentum <= 1:
            msg = f"momentum must lie in (0, 1], got {self.momentum}"
            raise ValueError(msg)
        self.running_mean = np.zeros(self.size)
        self.running_variance = np.zeros(self.size)

    def update(self, x: np.ndarray) -> None:
        """Fold one instance into the running statistics"""
        self.count += 1
        weight = max(1.0 - self.momentum, 1.0 / self.count)
        delta = x - self.running_mean
        self.running_mean += weight * delta
        self.running_variance = (1.0 - weight) * (
            self.running_variance + weight * delta * delta
        )


def normalize(
    normalizer: RunningNormalizer, x: np.ndarray, *, training: bool
) -> np.ndarray:
    """Standardize ``x`` with the running statistics

    When ``training`` is set the statistics are updated with ``x`` first.
    Before any update has happened the input passes through unchanged.

    Raises:
        ContractViolationError: If ``x`` does not match the normalizer size
    """
    check_length("x", x, normalizer.size)
    if training:
        normalizer.update(x)
    if normalizer.count == 0:
        return x.astype(float, copy=True)
    return (x - normalizer.running_mean) / np.sqrt(
        normalizer.running_variance + VARIANCE_FLOOR
    )
