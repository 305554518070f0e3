"""Text dump of tree models

Two-space indentation per depth level::

    I d=<depth> f=<feature> th=<threshold> |w|=<l2norm>
    L d=<depth> p=[<softmax probs, 4 decimals>] n=<samples seen>

Fields without a value for a model (no split test in a soft tree, no gate
weight in a Hoeffding tree) are written as ``-``.
"""

import numpy as np


def format_probs(proba: np.ndarray) -> str:
    return "[" + ", ".join(f"{p:.4f}" for p in proba) + "]"


def internal_line(
    depth: int, feature: int | None, threshold: float | None, weight_norm: float | None
) -> str:
    f = "-" if feature is None else str(feature)
    th = "-" if threshold is None else f"{threshold:.6g}"
    w = "-" if weight_norm is None else f"{weight_norm:.4f}"
    return f"{'  ' * depth}I d={depth} f={f} th={th} |w|={w}"


def leaf_line(depth: int, proba: np.ndarray, samples_seen: int) -> str:
    return f"{'  ' * depth}L d={depth} p={format_probs(proba)} n={samples_seen}"


def header_line(model: str, n_features: int, n_classes: int, node_count: int) -> str:
    return f"# {model} p={n_features} k={n_classes} nodes={node_count}"
