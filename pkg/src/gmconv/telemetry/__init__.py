"""Structured run telemetry: levels, recorder and sinks."""

from gmconv.telemetry.levels import LogLevel
from gmconv.telemetry.recorder import Recorder, default_sinks, get_recorder, set_recorder
from gmconv.telemetry.sinks import BaseSink, ConsoleSink, CsvSink, JsonlSink

__all__ = [
    "BaseSink",
    "ConsoleSink",
    "CsvSink",
    "JsonlSink",
    "LogLevel",
    "Recorder",
    "default_sinks",
    "get_recorder",
    "set_recorder",
]
