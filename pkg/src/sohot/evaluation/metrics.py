"""Stream-level metrics"""

import numpy as np
from scipy.stats import rankdata


def binary_auroc(scores: np.ndarray, positives: np.ndarray) -> float | None:
    """Mann-Whitney AUROC with midranks for ties

    Returns:
        AUROC in [0, 1], or None without both positives and negatives
    """
    scores = np.asarray(scores, dtype=float)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = positives.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    u = ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auroc(proba: np.ndarray, labels: np.ndarray) -> float | None:
    """AUROC of class probabilities

    Binary problems score the probability of class 1; with more classes the
    result is the unweighted one-vs-rest mean over classes that have both
    positive and negative examples.
    """
    proba = np.asarray(proba, dtype=float)
    labels = np.asarray(labels)
    if proba.ndim != 2 or proba.shape[0] != labels.shape[0]:
        msg = "proba must have shape (n, k) matching labels"
        raise ValueError(msg)
    if proba.shape[1] == 2:
        return binary_auroc(proba[:, 1], labels == 1)

    values = [
        value
        for c in np.unique(labels)
        if (value := binary_auroc(proba[:, int(c)], labels == c)) is not None
    ]
    if not values:
        return None
    return float(np.mean(values))


class AurocAccumulator:
    """Collects (probabilities, label) pairs over a stream

    Beyond ``capacity`` pairs a uniform reservoir sample is kept.
    """

    def __init__(self, n_classes: int, capacity: int = 1_000_000, seed: int = 0):
        self.n_classes = n_classes
        self.capacity = capacity
        self.seen = 0
        self._proba: list[np.ndarray] = []
        self._labels: list[int] = []
        self._rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return len(self._labels)

    def add(self, proba: np.ndarray, label: int) -> None:
        self.seen += 1
        if len(self._labels) < self.capacity:
            self._proba.append(np.asarray(proba, dtype=float))
            self._labels.append(int(label))
            return
        slot = int(self._rng.integers(self.seen))
        if slot < self.capacity:
            self._proba[slot] = np.asarray(proba, dtype=float)
            self._labels[slot] = int(label)

    def compute(self) -> float | None:
        if not self._labels:
            return None
        return auroc(np.vstack(self._proba), np.asarray(self._labels))
