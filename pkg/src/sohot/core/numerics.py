"""Scalar and vector numerics shared by every learner"""

import math

import numpy as np
from pydantic import BaseModel, Field, field_validator


class ContractViolationError(ValueError):
    """Raised when an operation is called with arguments that break its contract"""

    pass


class SmoothStepParams(BaseModel):
    """Width of the cubic smooth-step gate"""

    model_config = {"frozen": True}

    gamma: float = Field(1.0, description="Width of the smooth region around 0")

    @field_validator("gamma")
    @classmethod
    def validate_gamma(cls, v: float) -> float:
        """Gate width must be positive"""
        if not v > 0:
            msg = f"gamma must be > 0, got {v}"
            raise ValueError(msg)
        return v


def check_length(name: str, vector: np.ndarray, expected: int) -> None:
    """Raise ContractViolationError unless ``vector`` has ``expected`` entries"""
    if vector.shape != (expected,):
        msg = f"{name} must have length {expected}, got shape {vector.shape}"
        raise ContractViolationError(msg)


def smooth_step(t: float, params: SmoothStepParams) -> float:
    """Cubic gate that is exactly 0 below -gamma/2 and exactly 1 above gamma/2"""
    gamma = params.gamma
    if t <= -gamma / 2:
        return 0.0
    if t >= gamma / 2:
        return 1.0
    return -2.0 / gamma**3 * t**3 + 3.0 / (2.0 * gamma) * t + 0.5


def smooth_step_derivative(t: float, params: SmoothStepParams) -> float:
    """Analytic derivative of :func:`smooth_step`"""
    gamma = params.gamma
    if abs(t) >= gamma / 2:
        return 0.0
    return -6.0 / gamma**3 * t**2 + 3.0 / (2.0 * gamma)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax"""
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


def softmax_cross_entropy(
    logits: np.ndarray, true_class: int
) -> tuple[float, np.ndarray]:
    """Cross-entropy of softmax(logits) against ``true_class`` and its gradient

    Returns:
        Tuple of (loss, gradient with respect to the logits)
    """
    k = logits.shape[0]
    if not 0 <= true_class < k:
        msg = f"true_class must be in [0, {k}), got {true_class}"
        raise ContractViolationError(msg)

    shifted = logits - np.max(logits)
    log_norm = math.log(float(np.exp(shifted).sum()))
    loss = log_norm - float(shifted[true_class])

    grad = np.exp(shifted - log_norm)
    grad[true_class] -= 1.0
    return max(loss, 0.0), grad


def log_loss(proba: np.ndarray, true_class: int, floor: float = 1e-15) -> float:
    """Cross-entropy of a probability vector, clipped away from log(0)"""
    return -math.log(min(max(float(proba[true_class]), floor), 1.0))
