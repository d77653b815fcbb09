"""
Storage module for experiment records
"""

from .record_writer import RecordWriteError, RecordWriter, emit_csv, read_csv, render_csv

__all__ = [
    "RecordWriteError",
    "RecordWriter",
    "emit_csv",
    "read_csv",
    "render_csv",
]
