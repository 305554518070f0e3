"""Build a stream from its declarative spec"""

import numpy as np

from sohot.models import DriftKind, StreamKind, StreamSpec
from sohot.streams.base import Stream
from sohot.streams.csv_source import csv_stream
from sohot.streams.drift import oversample_drift
from sohot.streams.generators import GENERATORS


def build_stream(spec: StreamSpec, seed: int | None = None) -> Stream:
    """Stream for ``spec``; ``seed`` overrides ``spec.seed`` (one per repetition)

    Raises:
        ConfigError: If the CSV label column does not exist
        StreamParseError: If the CSV file cannot be parsed
    """
    seed = spec.seed if seed is None else seed

    if spec.kind == StreamKind.CSV:
        assert spec.csv_path is not None
        stream = csv_stream(
            spec.csv_path,
            spec.label_column,
            shuffle_seed=seed if spec.shuffle else None,
        )
    else:
        stream = GENERATORS[spec.kind.value](spec, seed)

    if spec.drift.kind == DriftKind.OVERSAMPLE:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
        stream = oversample_drift(stream, spec.drift, spec.n_instances, rng)
    return stream
