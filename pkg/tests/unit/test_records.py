"""
Unit tests for record emission
"""

import json

import pytest

from star_secrecy.models.experiment import ExperimentRecord, ExperimentSpec
from star_secrecy.storage.record_writer import (
    CSV_COLUMNS,
    RecordWriteError,
    RecordWriter,
    emit_csv,
    format_float,
    read_csv,
    render_csv,
)

pytestmark = pytest.mark.unit


def record(scheme="star-noma", x=10.0, metric="secrecy_capacity", mean=1.25, std=0.5,
           trials=4, infeasible=0, seed=7):
    return ExperimentRecord(scheme=scheme, x=x, metric=metric, mean=mean, std=std,
                            trials=trials, infeasible=infeasible, seed=seed)


class TestRenderCsv:
    """Test cases for CSV rendering"""

    def test_header_only(self):
        assert render_csv([]) == ",".join(CSV_COLUMNS) + "\n"

    def test_float_format(self):
        assert format_float(1.0 / 3.0) == "0.333333333"
        assert format_float(10.0) == "10"
        assert format_float(1e-12) == "1e-12"

    def test_row(self):
        lines = render_csv([record(mean=1.0 / 3.0, infeasible=1)]).splitlines()
        assert lines[1] == "star-noma,10,secrecy_capacity,0.333333333,0.5,4,1,7"

    def test_sorted_by_scheme_x_metric(self):
        records = [
            record(scheme="star-oma", x=5.0),
            record(scheme="cris-noma", x=10.0),
            record(scheme="cris-noma", x=5.0, metric="transmission_rate"),
            record(scheme="cris-noma", x=5.0, metric="secrecy_capacity"),
        ]
        rows = [line.split(",")[:3] for line in render_csv(records).splitlines()[1:]]
        assert rows == [
            ["cris-noma", "5", "secrecy_capacity"],
            ["cris-noma", "5", "transmission_rate"],
            ["cris-noma", "10", "secrecy_capacity"],
            ["star-oma", "5", "secrecy_capacity"],
        ]


class TestRecordFiles:
    """Test cases for writing and reading record files"""

    def test_emit_and_read(self, tmp_path):
        records = [record(), record(scheme="random-phase", mean=0.75, std=0.0, infeasible=2)]
        path = emit_csv(records, tmp_path / "out" / "sweep-power.csv")
        loaded = read_csv(path)
        assert [r.scheme for r in loaded] == ["random-phase", "star-noma"]
        assert loaded[1] == records[0]

    def test_write_csv_without_sidecar(self, tmp_path):
        writer = RecordWriter(tmp_path / "nested" / "dir")
        csv_path = writer.write_csv("quantization.csv", [record()])
        assert csv_path == tmp_path / "nested" / "dir" / "quantization.csv"
        assert not (tmp_path / "nested" / "dir" / "quantization.json").exists()
        assert read_csv(csv_path) == [record()]

    def test_writer_with_sidecar(self, tmp_path):
        spec = ExperimentSpec(experiment="sweep-power", trials=4, seed=7)
        writer = RecordWriter(tmp_path / "results")
        csv_path = writer.write("sweep-power", [record()], spec)
        assert csv_path == tmp_path / "results" / "sweep-power.csv"
        sidecar = json.loads((tmp_path / "results" / "sweep-power.json").read_text(encoding="utf-8"))
        assert sidecar["rows"] == 1
        assert sidecar["spec"]["seed"] == 7
        assert sidecar["columns"] == CSV_COLUMNS

    def test_writer_output_is_deterministic(self, tmp_path):
        spec = ExperimentSpec(experiment="placement", trials=2)
        first = RecordWriter(tmp_path / "a").write("placement", [record()], spec)
        second = RecordWriter(tmp_path / "b").write("placement", [record()], spec)
        assert first.read_bytes() == second.read_bytes()
        assert (tmp_path / "a" / "placement.json").read_bytes() == (tmp_path / "b" / "placement.json").read_bytes()

    def test_directory_is_a_file(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(RecordWriteError) as exc_info:
            RecordWriter(blocker / "nested").write("sweep-power", [record()])
        assert exc_info.value.path == blocker / "nested"

    def test_read_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(RecordWriteError):
            read_csv(path)

    def test_read_missing_file(self, tmp_path):
        with pytest.raises(RecordWriteError):
            read_csv(tmp_path / "absent.csv")
