"""Average share of important features per decision rule"""

from collections.abc import Iterable

import numpy as np

from sohot.streams.base import Sample
from sohot.trees.base import StreamClassifier


def transparency_series(
    model: StreamClassifier,
    stream: Iterable[Sample],
    n: int,
    *,
    train: bool = False,
) -> float | None:
    """Mean of ``count / p`` over every visited (instance, decision rule) pair

    With ``train`` set each instance is learned after it was evaluated.

    Returns:
        The ratio, or None if no instance passed through a decision rule
    """
    p = model.n_features
    ratios: list[float] = []
    for t, sample in enumerate(stream):
        if t >= n:
            break
        evaluation = model.evaluate_one(sample.features)
        ratios.extend(count / p for count in evaluation.transparency_counts)
        if train:
            model.learn_one(sample.features, sample.label)
    if not ratios:
        return None
    return float(np.mean(ratios))
