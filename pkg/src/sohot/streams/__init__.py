"""Synthetic and file-backed data streams"""

from sohot.streams.base import Sample, Stream, StreamParseError, StreamStats
from sohot.streams.csv_source import csv_stream, load_csv
from sohot.streams.drift import ConceptSchedule, oversample_drift
from sohot.streams.factory import build_stream
from sohot.streams.generators import (
    agrawal_stream,
    hyperplane_stream,
    rbf_stream,
    sea_stream,
)

__all__ = [
    "ConceptSchedule",
    "Sample",
    "Stream",
    "StreamParseError",
    "StreamStats",
    "agrawal_stream",
    "build_stream",
    "csv_stream",
    "hyperplane_stream",
    "load_csv",
    "oversample_drift",
    "rbf_stream",
    "sea_stream",
]
