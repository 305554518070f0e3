"""Synthetic drifting streams: SEA, Agrawal, rotating hyperplane, random RBF

Parameterizations follow the usual MOA definitions. Every generator is a
pure function of its spec and seed: the seed is split into independent
child streams for features, labels and concept selection.
"""

from collections.abc import Callable, Iterator

import numpy as np

from sohot.models import DriftKind, StreamSpec
from sohot.streams.base import Sample, Stream
from sohot.streams.drift import (
    ConceptSchedule,
    flip_label,
    perturb_features,
    perturbation_at,
)

SEA_NOISE = 0.1
HYPERPLANE_NOISE = 0.05
HYPERPLANE_SIGMA_FLIP = 0.1
AGRAWAL_NOISE = 0.0
RBF_NOISE = 0.0


def _rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _schedule(spec: StreamSpec, rng: np.random.Generator) -> ConceptSchedule:
    drift = spec.drift
    if drift.kind in (DriftKind.OVERSAMPLE, DriftKind.PERTURBATION):
        # oversampling and perturbation are applied on top; the concept stays fixed
        drift = drift.model_copy(update={"positions": []})
    return ConceptSchedule(drift, rng)


# SEA


def sea_label(x: np.ndarray, threshold: float) -> int:
    return 1 if x[0] + x[1] <= threshold else 0


def sea_stream(spec: StreamSpec, seed: int | None = None) -> Stream:
    """Three uniform features in [0, 10]; class 1 iff ``f1 + f2 <= theta``"""
    seed = spec.seed if seed is None else seed
    feature_rng, label_rng, concept_rng, noise_rng = _rngs(seed, 4)
    schedule = _schedule(spec, concept_rng)
    noise = SEA_NOISE if spec.noise is None else spec.noise
    thresholds = spec.sea_thresholds
    low, high = np.zeros(3), np.full(3, 10.0)

    def generate() -> Iterator[Sample]:
        t = 0
        while True:
            x = feature_rng.uniform(0.0, 10.0, 3)
            concept = schedule.concept_at(t)
            y = sea_label(x, thresholds[concept % len(thresholds)])
            y = flip_label(y, 2, noise, label_rng)
            magnitude = perturbation_at(spec.drift, t)
            x = perturb_features(x, low, high, magnitude, noise_rng)
            yield Sample(x, y)
            t += 1

    return Stream(generate(), n_features=3, n_classes=2, name="sea")


# Agrawal

AGRAWAL_FEATURES = (
    "salary",
    "commission",
    "age",
    "elevel",
    "car",
    "zipcode",
    "hvalue",
    "hyears",
    "loan",
)
AGRAWAL_LOW = np.array([20_000, 0, 20, 0, 1, 0, 0, 1, 0], dtype=float)
AGRAWAL_HIGH = np.array(
    [150_000, 75_000, 80, 4, 20, 8, 1_350_000, 30, 500_000], dtype=float
)


def agrawal_features(rng: np.random.Generator) -> np.ndarray:
    salary = rng.uniform(20_000, 150_000)
    commission = 0.0 if salary >= 75_000 else rng.uniform(10_000, 75_000)
    age = rng.integers(20, 81)
    elevel = rng.integers(0, 5)
    car = rng.integers(1, 21)
    zipcode = rng.integers(0, 9)
    hvalue = (9 - zipcode) * 100_000 * rng.uniform(0.5, 1.5)
    hyears = rng.integers(1, 31)
    loan = rng.uniform(0, 500_000)
    return np.array(
        [salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan],
        dtype=float,
    )


def _between(v: float, lo: float, hi: float) -> bool:
    return lo <= v <= hi


def _agrawal_group_a(function: int, x: np.ndarray) -> bool:
    salary, commission, age, elevel, _car, _zip, hvalue, hyears, loan = x
    young = age < 40
    middle = 40 <= age < 60
    if function == 1:
        return age < 40 or age >= 60
    if function == 2:
        if young:
            return _between(salary, 50_000, 100_000)
        if middle:
            return _between(salary, 75_000, 125_000)
        return _between(salary, 25_000, 75_000)
    if function == 3:
        if young:
            return _between(elevel, 0, 1)
        if middle:
            return _between(elevel, 1, 3)
        return _between(elevel, 2, 4)
    if function == 4:
        if young:
            if _between(elevel, 0, 1):
                return _between(salary, 25_000, 75_000)
            return _between(salary, 50_000, 100_000)
        if middle:
            if _between(elevel, 1, 3):
                return _between(salary, 50_000, 100_000)
            return _between(salary, 75_000, 125_000)
        if _between(elevel, 2, 4):
            return _between(salary, 50_000, 100_000)
        return _between(salary, 25_000, 75_000)
    if function == 5:
        if young:
            if _between(salary, 50_000, 100_000):
                return _between(loan, 100_000, 300_000)
            return _between(loan, 200_000, 400_000)
        if middle:
            if _between(salary, 75_000, 125_000):
                return _between(loan, 200_000, 400_000)
            return _between(loan, 300_000, 500_000)
        if _between(salary, 25_000, 75_000):
            return _between(loan, 300_000, 500_000)
        return _between(loan, 100_000, 300_000)
    total = salary + commission
    if function == 6:
        if young:
            return _between(total, 50_000, 100_000)
        if middle:
            return _between(total, 75_000, 125_000)
        return _between(total, 25_000, 75_000)
    if function == 7:
        return 2 / 3 * total - loan / 5 - 20_000 > 0
    if function == 8:
        return 2 / 3 * total - 5_000 * elevel - 20_000 > 0
    if function == 9:
        return 2 / 3 * total - 5_000 * elevel - loan / 5 - 10_000 > 0
    if function == 10:
        equity = hvalue * (hyears - 20) / 10 if hyears >= 20 else 0.0
        return 2 / 3 * total - 5_000 * elevel + equity / 5 - 10_000 > 0
    msg = f"Agrawal function index must be in 1..10, got {function}"
    raise ValueError(msg)


def agrawal_label(function: int, x: np.ndarray) -> int:
    """Class 0 for group A, class 1 otherwise"""
    return 0 if _agrawal_group_a(function, x) else 1


def agrawal_stream(spec: StreamSpec, seed: int | None = None) -> Stream:
    """Nine loan-applicant features; concept ``c`` uses ``agrawal_functions[c]``"""
    seed = spec.seed if seed is None else seed
    feature_rng, label_rng, concept_rng, noise_rng = _rngs(seed, 4)
    schedule = _schedule(spec, concept_rng)
    noise = AGRAWAL_NOISE if spec.noise is None else spec.noise
    functions = spec.agrawal_functions

    def generate() -> Iterator[Sample]:
        t = 0
        while True:
            x = agrawal_features(feature_rng)
            concept = schedule.concept_at(t)
            y = agrawal_label(functions[concept % len(functions)], x)
            y = flip_label(y, 2, noise, label_rng)
            x = perturb_features(
                x, AGRAWAL_LOW, AGRAWAL_HIGH, perturbation_at(spec.drift, t), noise_rng
            )
            yield Sample(x, y)
            t += 1

    return Stream(generate(), n_features=9, n_classes=2, name="agrawal")


# Rotating hyperplane


class Hyperplane:
    """Hyperplane whose weights drift by ``magnitude`` per instance"""

    def __init__(self, n_features: int, magnitude: float, rng: np.random.Generator):
        self.weights = rng.uniform(0.0, 1.0, n_features)
        self.sigma = np.ones(n_features)
        self.magnitude = magnitude

    def label(self, x: np.ndarray) -> int:
        return 1 if float(self.weights @ x) >= 0.5 * float(self.weights.sum()) else 0

    def step(self, rng: np.random.Generator) -> None:
        self.weights += self.sigma * self.magnitude
        flips = rng.random(self.weights.shape[0]) < HYPERPLANE_SIGMA_FLIP
        self.sigma[flips] *= -1.0


def hyperplane_stream(spec: StreamSpec, seed: int | None = None) -> Stream:
    """Uniform features in [0, 1]; class 1 iff ``<w, x> >= sum(w) / 2``

    Each concept of the drift schedule owns its own hyperplane; all of
    them rotate at the configured magnitude.
    """
    seed = spec.seed if seed is None else seed
    feature_rng, label_rng, concept_rng, noise_rng, plane_rng = _rngs(seed, 5)
    schedule = _schedule(spec, concept_rng)
    noise = HYPERPLANE_NOISE if spec.noise is None else spec.noise
    d = spec.hyperplane_features
    planes = [
        Hyperplane(d, spec.hyperplane_magnitude, plane_rng)
        for _ in range(schedule.n_concepts)
    ]
    low, high = np.zeros(d), np.ones(d)

    def generate() -> Iterator[Sample]:
        t = 0
        while True:
            x = feature_rng.uniform(0.0, 1.0, d)
            concept = schedule.concept_at(t)
            y = flip_label(planes[concept].label(x), 2, noise, label_rng)
            magnitude = perturbation_at(spec.drift, t)
            x = perturb_features(x, low, high, magnitude, noise_rng)
            yield Sample(x, y)
            for plane in planes:
                plane.step(plane_rng)
            t += 1

    return Stream(generate(), n_features=d, n_classes=2, name="hyperplane")


# Random RBF


class CentroidSet:
    """Random RBF centroids moving at constant speed inside the unit cube"""

    def __init__(
        self,
        n_centroids: int,
        n_features: int,
        n_classes: int,
        speed: float,
        rng: np.random.Generator,
    ) -> None:
        self.centres = rng.uniform(0.0, 1.0, (n_centroids, n_features))
        self.labels = rng.integers(0, n_classes, n_centroids)
        self.std_devs = rng.uniform(0.0, 1.0, n_centroids)
        weights = rng.uniform(0.0, 1.0, n_centroids)
        self.probs = weights / weights.sum()
        directions = rng.normal(size=(n_centroids, n_features))
        norms = np.linalg.norm(directions, axis=1, keepdims=True)
        self.velocity = speed * directions / np.where(norms > 0, norms, 1.0)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        i = int(rng.choice(self.centres.shape[0], p=self.probs))
        offset = rng.normal(size=self.centres.shape[1])
        norm = np.linalg.norm(offset)
        if norm > 0:
            offset /= norm
        x = self.centres[i] + offset * rng.normal() * self.std_devs[i]
        return x, int(self.labels[i])

    def step(self) -> None:
        self.centres += self.velocity
        out = (self.centres < 0.0) | (self.centres > 1.0)
        self.centres = np.clip(self.centres, 0.0, 1.0)
        self.velocity[out] *= -1.0


def rbf_stream(spec: StreamSpec, seed: int | None = None) -> Stream:
    """Gaussian clouds around labelled centroids that drift at ``rbf_speed``"""
    seed = spec.seed if seed is None else seed
    feature_rng, label_rng, concept_rng, noise_rng, centroid_rng = _rngs(seed, 5)
    schedule = _schedule(spec, concept_rng)
    noise = RBF_NOISE if spec.noise is None else spec.noise
    d, k = spec.rbf_features, spec.rbf_classes
    sets = [
        CentroidSet(spec.rbf_centroids, d, k, spec.rbf_speed, centroid_rng)
        for _ in range(schedule.n_concepts)
    ]

    def generate() -> Iterator[Sample]:
        t = 0
        while True:
            concept = schedule.concept_at(t)
            x, y = sets[concept].sample(feature_rng)
            y = flip_label(y, k, noise, label_rng)
            magnitude = perturbation_at(spec.drift, t)
            if magnitude > 0:
                x = x + magnitude * noise_rng.uniform(-1.0, 1.0, d)
            yield Sample(x, y)
            if spec.rbf_speed > 0:
                for centroids in sets:
                    centroids.step()
            t += 1

    return Stream(generate(), n_features=d, n_classes=k, name="rbf")


GENERATORS: dict[str, Callable[[StreamSpec, int | None], Stream]] = {
    "sea": sea_stream,
    "agrawal": agrawal_stream,
    "hyperplane": hyperplane_stream,
    "rbf": rbf_stream,
}
