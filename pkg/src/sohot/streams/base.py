"""Stream primitives"""

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np


class StreamParseError(ValueError):
    """Raised when a file-backed stream contains an unparseable cell"""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


@dataclass(frozen=True, slots=True)
class Sample:
    """One stream instance"""

    features: np.ndarray
    label: int


@dataclass
class StreamStats:
    n_features: int
    n_classes: int
    n_emitted: int = 0


class Stream:
    """Single-consumer iterator over samples of fixed dimensions

    Counts emitted samples in :attr:`stats` and never lets a sample with
    the wrong dimension or label through.
    """

    def __init__(
        self,
        samples: Iterable[Sample],
        n_features: int,
        n_classes: int,
        name: str = "stream",
    ) -> None:
        self._samples = iter(samples)
        self.stats = StreamStats(n_features=n_features, n_classes=n_classes)
        self.name = name

    @property
    def n_features(self) -> int:
        return self.stats.n_features

    @property
    def n_classes(self) -> int:
        return self.stats.n_classes

    def __iter__(self) -> Iterator[Sample]:
        return self

    def __next__(self) -> Sample:
        sample = next(self._samples)
        if sample.features.shape != (self.stats.n_features,):
            msg = (
                f"{self.name}: sample has {sample.features.shape[0]} features, "
                f"expected {self.stats.n_features}"
            )
            raise ValueError(msg)
        if not 0 <= sample.label < self.stats.n_classes:
            msg = f"{self.name}: label {sample.label} outside [0, {self.n_classes})"
            raise ValueError(msg)
        self.stats.n_emitted += 1
        return sample

    def take(self, n: int) -> list[Sample]:
        """Up to ``n`` samples; fewer if the stream runs dry"""
        out: list[Sample] = []
        for sample in self:
            out.append(sample)
            if len(out) >= n:
                break
        return out
