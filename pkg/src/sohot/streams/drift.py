"""Drift composition: concept schedules, feature perturbation, class oversampling"""

import logging
from collections import deque
from collections.abc import Iterator

import numpy as np

from sohot.models import DriftKind, DriftSpec
from sohot.streams.base import Sample, Stream

logger = logging.getLogger(__name__)

OVERSAMPLE_BUFFER = 10_000


class ConceptSchedule:
    """Index of the active concept for every instance

    Abrupt drift switches to concept ``j + 1`` exactly at ``positions[j]``.
    Gradual drift picks the later concept with probability ramping linearly
    from 0 to 1 across ``[position - width / 2, position + width / 2]``.
    """

    def __init__(
        self, spec: DriftSpec, rng: np.random.Generator | None = None
    ) -> None:
        self.positions = list(spec.positions)
        self.width = spec.width
        self.gradual = spec.kind == DriftKind.GRADUAL and spec.width > 1
        self.rng = rng or np.random.default_rng(0)

    @property
    def n_concepts(self) -> int:
        return len(self.positions) + 1

    def switch_probability(self, t: int, position: int) -> float:
        """Probability that instance ``t`` already follows the concept after ``position``"""
        if not self.gradual:
            return 1.0 if t >= position else 0.0
        start = position - self.width / 2
        return float(np.clip((t - start) / self.width, 0.0, 1.0))

    def concept_at(self, t: int) -> int:
        concept = 0
        for position in self.positions:
            prob = self.switch_probability(t, position)
            if prob >= 1.0:
                concept += 1
            elif prob > 0.0 and self.rng.random() < prob:
                concept += 1
            else:
                break
        return concept


def perturbation_at(spec: DriftSpec, t: int) -> float:
    """Feature noise magnitude for instance ``t``

    Perturbation drift injects noise from its first position on, or over the
    whole stream when no position is given. The concept itself stays fixed.
    """
    if spec.kind != DriftKind.PERTURBATION:
        return 0.0
    if spec.positions and t < spec.positions[0]:
        return 0.0
    return spec.perturbation


def perturb_features(
    x: np.ndarray,
    low: np.ndarray,
    high: np.ndarray,
    magnitude: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Add uniform noise of ``magnitude`` times the feature range, clipped to it"""
    if magnitude <= 0:
        return x
    span = high - low
    noisy = x + span * magnitude * rng.uniform(-1.0, 1.0, size=x.shape)
    return np.clip(noisy, low, high)


def flip_label(label: int, n_classes: int, noise: float, rng: np.random.Generator) -> int:
    """Replace ``label`` by a different class with probability ``noise``"""
    if noise <= 0 or rng.random() >= noise:
        return label
    if n_classes == 2:
        return 1 - label
    other = int(rng.integers(n_classes - 1))
    return other if other < label else other + 1


def context_boundaries(spec: DriftSpec, n_instances: int) -> list[int]:
    """Start positions of the oversampling contexts after the first one"""
    if spec.positions:
        return list(spec.positions)
    step = n_instances / spec.contexts
    return [round(step * i) for i in range(1, spec.contexts)]


def oversample_drift(
    inner: Stream,
    spec: DriftSpec,
    n_instances: int,
    rng: np.random.Generator,
    buffer_size: int = OVERSAMPLE_BUFFER,
) -> Stream:
    """Inject abrupt drifts by oversampling one randomly chosen class per context

    In each context about ``spec.majority_fraction`` of the emitted samples
    carry that context's class. Samples that are not needed yet are kept in
    per-class buffers of ``buffer_size``; a full buffer drops its oldest
    sample and the first drop per class is logged as a warning. When the
    inner stream runs dry the output is truncated and a warning is logged.
    """
    k = inner.n_classes
    if k <= 1:
        return inner

    boundaries = context_boundaries(spec, n_instances)
    context_classes = [int(rng.integers(k)) for _ in range(len(boundaries) + 1)]
    buffers: list[deque[tuple[int, Sample]]] = [
        deque(maxlen=buffer_size) for _ in range(k)
    ]
    evicted = [0] * k
    arrivals = 0

    def keep(sample: Sample) -> None:
        buffer = buffers[sample.label]
        if len(buffer) == buffer_size:
            if evicted[sample.label] == 0:
                logger.warning(
                    "Oversampling buffer for class %d is full (%d samples), "
                    "dropping the oldest buffered samples",
                    sample.label,
                    buffer_size,
                )
            evicted[sample.label] += 1
        buffer.append((arrivals, sample))

    def pull(wanted: set[int]) -> Sample | None:
        nonlocal arrivals
        ready = [c for c in wanted if buffers[c]]
        if ready:
            c = min(ready, key=lambda cls: buffers[cls][0][0])
            return buffers[c].popleft()[1]
        for sample in inner:
            arrivals += 1
            if sample.label in wanted:
                return sample
            keep(sample)
        return None

    def generate() -> Iterator[Sample]:
        context = 0
        for t in range(n_instances):
            while context < len(boundaries) and t >= boundaries[context]:
                context += 1
            target = context_classes[context]
            if rng.random() < spec.majority_fraction:
                wanted = {target}
            else:
                wanted = set(range(k)) - {target}
            sample = pull(wanted)
            if sample is None:
                logger.warning(
                    "Inner stream exhausted after %d of %d oversampled instances",
                    t,
                    n_instances,
                )
                return
            yield sample

    logger.debug("Oversampling contexts at %s with classes %s", boundaries, context_classes)
    return Stream(generate(), inner.n_features, k, name=f"{inner.name}+oversample")
