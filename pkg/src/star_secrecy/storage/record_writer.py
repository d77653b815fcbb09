"""
CSV and JSON emission of experiment records
"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import structlog

from ..models.experiment import ExperimentRecord, ExperimentSpec
from ..models.system import StarSecrecyError

logger = structlog.get_logger(__name__)

CSV_COLUMNS = ["scheme", "x", "metric", "mean", "std", "trials", "infeasible", "seed"]
FLOAT_COLUMNS = ("x", "mean", "std")
INT_COLUMNS = ("trials", "infeasible", "seed")


class RecordWriteError(StarSecrecyError):
    """Record output could not be written or read back"""

    def __init__(self, message: str, path: Union[str, Path]):
        super().__init__(f"{message}: {path}")
        self.path = Path(path)


def format_float(value: float) -> str:
    return format(float(value), ".9g")


def sort_records(records: Sequence[ExperimentRecord]) -> List[ExperimentRecord]:
    return sorted(records, key=lambda r: (r.scheme, r.x, r.metric))


def render_csv(records: Sequence[ExperimentRecord]) -> str:
    """CSV text with the fixed header and 9 significant digits."""
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in sort_records(records):
        row = record.model_dump()
        for column in FLOAT_COLUMNS:
            row[column] = format_float(row[column])
        writer.writerow(row)
    return output.getvalue()


class RecordWriter:
    """
    Writes experiment records below one output directory
    """

    def __init__(self, base_path: Union[str, Path]):
        """
        Initialize record writer

        Args:
            base_path: Output directory, created on first write
        """
        self.base_path = Path(base_path).expanduser()

    def write(self, name: str, records: Sequence[ExperimentRecord],
              spec: Optional[ExperimentSpec] = None) -> Path:
        """
        Write `<name>.csv` and, when a spec is given, the `<name>.json` sidecar

        Args:
            name: File stem, usually the experiment id
            records: Aggregated records
            spec: Resolved experiment specification for provenance

        Returns:
            Path of the CSV file
        """
        self._ensure_directory(self.base_path)
        csv_path = self.base_path / f"{name}.csv"
        self._write_file(csv_path, render_csv(records))
        if spec is not None:
            self._write_file(self.base_path / f"{name}.json", self._sidecar(spec, records))

        logger.info("Records written", file_path=str(csv_path), rows=len(records))
        return csv_path

    def write_csv(self, file_name: str, records: Sequence[ExperimentRecord]) -> Path:
        """
        Write records to `<base_path>/<file_name>` without a sidecar

        Args:
            file_name: CSV file name, extension included
            records: Aggregated records

        Returns:
            Path of the CSV file
        """
        self._ensure_directory(self.base_path)
        csv_path = self.base_path / file_name
        self._write_file(csv_path, render_csv(records))
        return csv_path

    def _sidecar(self, spec: ExperimentSpec, records: Sequence[ExperimentRecord]) -> str:
        data: Dict[str, Any] = {
            "spec": spec.model_dump(mode="json"),
            "rows": len(records),
            "infeasible": sum(r.infeasible for r in records),
            "columns": CSV_COLUMNS,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    def _ensure_directory(self, path: Path):
        """Ensure directory exists"""
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error("Failed to create directory", path=str(path), error=str(e))
            raise RecordWriteError(f"Cannot create directory ({e.strerror})", path)

    def _write_file(self, file_path: Path, content: str):
        """Write content to file"""
        try:
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                f.write(content)
            logger.debug("File written successfully",
                         file_path=str(file_path),
                         size_bytes=len(content.encode("utf-8")))
        except OSError as e:
            logger.error("Failed to write file", file_path=str(file_path), error=str(e))
            raise RecordWriteError(f"Cannot write file ({e.strerror})", file_path)


def emit_csv(records: Sequence[ExperimentRecord], path: Union[str, Path]) -> Path:
    """Write records to an explicit CSV path."""
    path = Path(path)
    return RecordWriter(path.parent).write_csv(path.name, records)


def read_csv(path: Union[str, Path]) -> List[ExperimentRecord]:
    """Parse a CSV written by `emit_csv`."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != CSV_COLUMNS:
                raise RecordWriteError(f"Unexpected header {reader.fieldnames}", path)
            rows = list(reader)
    except OSError as e:
        raise RecordWriteError(f"Cannot read file ({e.strerror})", path)

    records = []
    for row in rows:
        for column in FLOAT_COLUMNS:
            row[column] = float(row[column])
        for column in INT_COLUMNS:
            row[column] = int(row[column])
        records.append(ExperimentRecord(**row))
    return records
