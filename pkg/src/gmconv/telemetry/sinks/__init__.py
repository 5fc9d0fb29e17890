"""Sink exports for gmconv telemetry."""

from gmconv.telemetry.sinks.base import BaseSink
from gmconv.telemetry.sinks.console import ConsoleSink
from gmconv.telemetry.sinks.csv import CsvSink
from gmconv.telemetry.sinks.jsonl import JsonlSink

__all__ = [
    "BaseSink",
    "ConsoleSink",
    "CsvSink",
    "JsonlSink",
]
