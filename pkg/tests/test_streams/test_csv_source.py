"""Tests for CSV-backed streams"""

import numpy as np
import pytest

from sohot.config import ConfigError
from sohot.models import StreamKind, StreamSpec
from sohot.streams.base import StreamParseError
from sohot.streams.csv_source import csv_stream, load_csv
from sohot.streams.factory import build_stream


@pytest.fixture
def table(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text(
        "a,colour,b,label\n"
        "1.0,red,10,yes\n"
        "2.0,blue,20,no\n"
        "3.0,red,30,maybe\n"
        "4.0,green,40,yes\n"
    )
    return path


class TestLoadCsv:
    """Test parsing and encoding"""

    def test_columns_and_labels(self, table):
        features, labels, names = load_csv(table)
        assert names == ["a", "colour", "b"]
        np.testing.assert_array_equal(features[:, 0], [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(features[:, 2], [10.0, 20.0, 30.0, 40.0])
        np.testing.assert_array_equal(labels, [0, 1, 2, 0])

    def test_nominal_columns_are_encoded_by_first_appearance(self, table):
        features, _, _ = load_csv(table)
        np.testing.assert_array_equal(features[:, 1], [0.0, 1.0, 0.0, 2.0])

    def test_label_column_by_name_and_index(self, table):
        _, labels, names = load_csv(table, "b")
        assert names == ["a", "colour", "label"]
        np.testing.assert_array_equal(labels, [0, 1, 2, 3])
        _, labels_by_index, _ = load_csv(table, "0")
        np.testing.assert_array_equal(labels_by_index, [0, 1, 2, 3])

    def test_missing_label_column(self, table):
        with pytest.raises(ConfigError) as exc_info:
            load_csv(table, "target")
        assert exc_info.value.key == "label_column"

    def test_unparseable_cell_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,label\n1,2,x\n3,4,y\n5,oops,x\n")
        with pytest.raises(StreamParseError, match=":4:") as exc_info:
            load_csv(path)
        assert exc_info.value.line == 4
        assert "oops" in str(exc_info.value)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("a,b,label\n1,2,x\n3,x\n")
        with pytest.raises(StreamParseError, match="expected 3 cells"):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(StreamParseError, match="header"):
            load_csv(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("a,label\n")
        with pytest.raises(StreamParseError, match="no data rows"):
            load_csv(path)


class TestCsvStream:
    """Test row order and shuffling"""

    def test_file_order_without_seed(self, table):
        stream = csv_stream(table)
        assert stream.n_features == 3
        assert stream.n_classes == 3
        assert [s.features[0] for s in stream] == [1.0, 2.0, 3.0, 4.0]

    def test_shuffle_is_a_seeded_permutation(self, table):
        a = [s.features[0] for s in csv_stream(table, shuffle_seed=5)]
        b = [s.features[0] for s in csv_stream(table, shuffle_seed=5)]
        assert a == b
        assert sorted(a) == [1.0, 2.0, 3.0, 4.0]

    def test_stream_ends_with_the_file(self, table):
        stream = csv_stream(table)
        assert len(stream.take(10)) == 4
        assert stream.stats.n_emitted == 4

    def test_built_from_spec(self, table):
        spec = StreamSpec(
            kind=StreamKind.CSV, csv_path=str(table), shuffle=False, n_instances=4
        )
        samples = build_stream(spec).take(4)
        assert [s.label for s in samples] == [0, 1, 2, 0]
