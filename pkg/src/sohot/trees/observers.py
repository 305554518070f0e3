"""Leaf sufficient statistics and Hoeffding split evaluation

Both the soft Hoeffding tree and the classic Hoeffding tree keep the same
statistics in their leaves: class counts plus, per feature and class, an
incremental Gaussian (count, mean, M2) and the observed feature range.
Candidate thresholds are equally spaced inside the observed range and the
class mass left of a threshold is read off the Gaussian tail.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from sohot.core.numerics import ContractViolationError

NULL_SPLIT = -1


@dataclass(frozen=True)
class SplitTest:
    """Univariate test ``x[feature_index] < threshold``"""

    feature_index: int
    threshold: float

    def goes_left(self, x: np.ndarray) -> bool:
        return bool(x[self.feature_index] < self.threshold)


@dataclass(frozen=True)
class SplitCandidate:
    """Best threshold found for one feature (or the null split)"""

    feature_index: int
    threshold: float
    gain: float
    left_counts: np.ndarray
    right_counts: np.ndarray

    @property
    def is_null(self) -> bool:
        return self.feature_index == NULL_SPLIT


@dataclass(frozen=True)
class SplitDecision:
    """Outcome of a split attempt, kept for logging and tests"""

    should_split: bool
    best: SplitCandidate | None
    second: SplitCandidate | None
    gain_margin: float
    epsilon: float


@dataclass
class LeafStats:
    """Sufficient statistics of the instances routed to one leaf"""

    n_features: int
    n_classes: int
    class_counts: np.ndarray = field(init=False)
    means: np.ndarray = field(init=False)
    m2: np.ndarray = field(init=False)
    feature_min: np.ndarray = field(init=False)
    feature_max: np.ndarray = field(init=False)
    samples_since_last_attempt: int = 0

    def __post_init__(self) -> None:
        self.class_counts = np.zeros(self.n_classes, dtype=np.int64)
        self.means = np.zeros((self.n_classes, self.n_features))
        self.m2 = np.zeros((self.n_classes, self.n_features))
        self.feature_min = np.full(self.n_features, np.inf)
        self.feature_max = np.full(self.n_features, -np.inf)

    @property
    def total(self) -> int:
        return int(self.class_counts.sum())

    def observe(self, x: np.ndarray, y: int) -> None:
        """Welford update of the class-conditional Gaussians"""
        self.class_counts[y] += 1
        n = self.class_counts[y]
        delta = x - self.means[y]
        self.means[y] += delta / n
        self.m2[y] += delta * (x - self.means[y])
        np.minimum(self.feature_min, x, out=self.feature_min)
        np.maximum(self.feature_max, x, out=self.feature_max)
        self.samples_since_last_attempt += 1

    def variances(self) -> np.ndarray:
        """Sample variances per (class, feature); zero below two observations"""
        counts = self.class_counts[:, None].astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            var = np.where(counts > 1, self.m2 / (counts - 1), 0.0)
        return np.maximum(var, 0.0)

    def observed_classes(self) -> int:
        return int(np.count_nonzero(self.class_counts))


def hoeffding_bound(R: float, delta: float, n: int) -> float:
    """Hoeffding bound sqrt(R^2 ln(1/delta) / (2n))

    Raises:
        ContractViolationError: If n < 1 or delta outside (0, 1)
    """
    if n < 1:
        msg = f"n must be >= 1, got {n}"
        raise ContractViolationError(msg)
    if not 0 < delta < 1:
        msg = f"delta must lie in (0, 1), got {delta}"
        raise ContractViolationError(msg)
    return math.sqrt(R * R * math.log(1.0 / delta) / (2.0 * n))


def class_range(n_classes: int) -> float:
    """Range R of information gain in bits for ``n_classes`` classes"""
    return math.log2(max(n_classes, 2))


def entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the first axis of ``counts``"""
    totals = counts.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        probs = np.where(totals > 0, counts / totals, 0.0)
        terms = np.where(probs > 0, -probs * np.log2(probs), 0.0)
    return terms.sum(axis=0)


def candidate_thresholds(stats: LeafStats, n_candidates: int) -> np.ndarray:
    """Equally spaced interior points of each feature's observed range

    Returns:
        Array of shape (n_features, n_candidates); rows of features without a
        proper range are NaN
    """
    steps = np.arange(1, n_candidates + 1) / (n_candidates + 1)
    span = stats.feature_max - stats.feature_min
    thresholds = stats.feature_min[:, None] + span[:, None] * steps[None, :]
    valid = np.isfinite(span) & (span > 0)
    thresholds[~valid] = np.nan
    return thresholds


def left_class_mass(stats: LeafStats, thresholds: np.ndarray) -> np.ndarray:
    """Estimated class counts with ``x < threshold`` from the Gaussian tails

    Returns:
        Array of shape (n_classes, n_features, n_candidates)
    """
    counts = stats.class_counts.astype(float)[:, None, None]
    means = stats.means[:, :, None]
    stds = np.sqrt(stats.variances())[:, :, None]
    theta = thresholds[None, :, :]

    with np.errstate(divide="ignore", invalid="ignore"):
        z = (theta - means) / stds
    tail = np.where(stds > 0, norm.cdf(z), (means < theta).astype(float))
    return counts * tail


def evaluate_splits(stats: LeafStats, n_candidates: int = 10) -> list[SplitCandidate]:
    """Best information-gain threshold per feature plus the null split

    Candidates are ordered by decreasing gain; exact ties keep the lower
    feature index first and the null split last.
    """
    prior = stats.class_counts.astype(float)
    n = prior.sum()
    prior_entropy = float(entropy(prior))

    candidates = [
        SplitCandidate(
            feature_index=NULL_SPLIT,
            threshold=math.nan,
            gain=0.0,
            left_counts=np.zeros_like(prior),
            right_counts=prior.copy(),
        )
    ]
    if n <= 0:
        return candidates

    thresholds = candidate_thresholds(stats, n_candidates)
    left = left_class_mass(stats, thresholds)
    right = prior[:, None, None] - left
    n_left = left.sum(axis=0)
    n_right = right.sum(axis=0)
    child_entropy = (n_left * entropy(left) + n_right * entropy(right)) / n
    gains = prior_entropy - child_entropy

    for j in range(stats.n_features):
        if np.isnan(thresholds[j, 0]):
            continue
        t = int(np.argmax(gains[j]))
        candidates.append(
            SplitCandidate(
                feature_index=j,
                threshold=float(thresholds[j, t]),
                gain=float(gains[j, t]),
                left_counts=left[:, j, t].copy(),
                right_counts=right[:, j, t].copy(),
            )
        )

    def order(candidate: SplitCandidate) -> tuple[float, int]:
        index = stats.n_features if candidate.is_null else candidate.feature_index
        return (-candidate.gain, index)

    return sorted(candidates, key=order)


def decide_split(
    stats: LeafStats,
    *,
    delta: float,
    tau: float,
    n_candidates: int = 10,
) -> SplitDecision:
    """Hoeffding test between the two best candidates

    Splits when the gain margin exceeds the bound and the winner is a real
    feature, or when the bound has shrunk below ``tau``. The null split is
    never chosen as the winner.
    """
    candidates = evaluate_splits(stats, n_candidates)
    best = candidates[0]
    second = candidates[1] if len(candidates) > 1 else None
    epsilon = hoeffding_bound(class_range(stats.n_classes), delta, max(stats.total, 1))
    margin = best.gain - (second.gain if second is not None else 0.0)

    should_split = (margin > epsilon and not best.is_null) or epsilon < tau
    if best.is_null:
        should_split = False
    return SplitDecision(
        should_split=should_split,
        best=best,
        second=second,
        gain_margin=margin,
        epsilon=epsilon,
    )
