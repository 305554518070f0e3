"""Adam updates for hand-derived gradients"""

from dataclasses import dataclass, field

import numpy as np

from sohot.core.numerics import ContractViolationError


@dataclass
class AdamState:
    """Per-parameter Adam moments

    One state is owned by every weight vector of a model; moments are
    allocated lazily on the first update so that the state can be created
    before the parameter length is known.
    """

    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps_stability: float = 1e-8
    step_count: int = 0
    first_moment: np.ndarray = field(default_factory=lambda: np.zeros(0))
    second_moment: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            msg = f"learning_rate must be > 0, got {self.learning_rate}"
            raise ValueError(msg)
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            msg = "beta1 and beta2 must lie in (0, 1)"
            raise ValueError(msg)

    @classmethod
    def fresh(cls, size: int, learning_rate: float = 1e-2) -> "AdamState":
        """Zero moments for a parameter vector of the given length"""
        return cls(
            learning_rate=learning_rate,
            first_moment=np.zeros(size),
            second_moment=np.zeros(size),
        )


def adam_update(
    state: AdamState, params: np.ndarray, grads: np.ndarray
) -> tuple[np.ndarray, AdamState]:
    """Apply one bias-corrected Adam step

    ``params`` and the moments of ``state`` are updated in place and also
    returned for convenience.

    Raises:
        ContractViolationError: If params, grads and moments differ in length
    """
    if state.first_moment.shape[0] == 0 and state.step_count == 0:
        state.first_moment = np.zeros_like(params, dtype=float)
        state.second_moment = np.zeros_like(params, dtype=float)

    if not (
        params.shape
        == grads.shape
        == state.first_moment.shape
        == state.second_moment.shape
    ):
        msg = (
            f"Length mismatch: params {params.shape}, grads {grads.shape}, "
            f"moments {state.first_moment.shape}/{state.second_moment.shape}"
        )
        raise ContractViolationError(msg)

    state.step_count += 1
    bc1 = 1.0 - state.beta1**state.step_count
    bc2 = 1.0 - state.beta2**state.step_count

    state.first_moment *= state.beta1
    state.first_moment += (1.0 - state.beta1) * grads
    state.second_moment *= state.beta2
    state.second_moment += (1.0 - state.beta2) * (grads * grads)

    denom = np.sqrt(state.second_moment / bc2) + state.eps_stability
    params -= (state.learning_rate / bc1) * state.first_moment / denom
    return params, state
