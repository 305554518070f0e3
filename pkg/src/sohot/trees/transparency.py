"""Number of important features of a decision rule"""

import numpy as np


def transparency_count(node_weight: np.ndarray, x: np.ndarray, alpha: float) -> int:
    """Count features with more than average influence on a decision rule

    A feature counts when ``alpha * |w_i x_i| / sigma >= 1 / p`` with
    ``sigma = sum_i |w_i x_i|``; the split test adds one more feature when
    ``1 - alpha >= 1 / p``. With ``alpha = 1`` this is the count for a plain
    soft tree. When ``sigma = 0`` no feature influences the gate and only the
    split-test term remains.
    """
    p = node_weight.shape[0]
    threshold = 1.0 / p
    split_term = 1 if 1.0 - alpha >= threshold else 0

    impact = np.abs(node_weight * x)
    sigma = float(np.sum(impact))
    if sigma == 0.0:
        return split_term
    gate_term = int(np.count_nonzero(alpha * (impact / sigma) >= threshold))
    return gate_term + split_term
