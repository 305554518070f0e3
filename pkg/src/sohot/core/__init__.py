"""Numerics shared by all learners"""

from sohot.core.normalize import RunningNormalizer, normalize
from sohot.core.numerics import (
    ContractViolationError,
    SmoothStepParams,
    log_loss,
    smooth_step,
    smooth_step_derivative,
    softmax,
    softmax_cross_entropy,
)
from sohot.core.optim import AdamState, adam_update

__all__ = [
    "AdamState",
    "ContractViolationError",
    "RunningNormalizer",
    "SmoothStepParams",
    "adam_update",
    "log_loss",
    "normalize",
    "smooth_step",
    "smooth_step_derivative",
    "softmax",
    "softmax_cross_entropy",
]
