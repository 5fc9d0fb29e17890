"""Recorder: fan-out of structured telemetry records to sinks."""

from __future__ import annotations

import os
import sys
import traceback as tb
from datetime import datetime
from typing import Any

from gmconv._compat import UTC
from gmconv.exceptions import ConfigError
from gmconv.telemetry.levels import LogLevel
from gmconv.telemetry.sinks.base import BaseSink
from gmconv.telemetry.sinks.console import ConsoleSink
from gmconv.telemetry.sinks.jsonl import JsonlSink


class Recorder:
    """
    Send structured records to every configured sink.

    A sink that raises is reported on stderr and skipped; telemetry never
    interrupts the computation it describes.

    Example:
        with Recorder(default_context={"run": "exact-c8"}) as rec:
            rec.log("training started", LogLevel.INFO, {"group": "C8"})
    """

    def __init__(
        self,
        sinks: list[BaseSink] | None = None,
        default_context: dict[str, Any] | None = None,
    ):
        """
        Args:
            sinks: Sinks to write to. If None, sinks are created from the environment.
            default_context: Context merged into every record.
        """
        self.sinks = sinks if sinks is not None else default_sinks()
        self.default_context = dict(default_context or {})

    def _build_payload(
        self,
        message: str,
        level: LogLevel,
        content: dict[str, Any] | None = None,
    ) -> dict[str, Any]:
        return {
            "timestamp_ms": int(datetime.now(UTC).timestamp() * 1000),
            "message": message,
            "level": level.value,
            **self.default_context,
            **(content or {}),
        }

    def log(
        self,
        message: str,
        level: LogLevel,
        content: dict[str, Any] | None = None,
    ) -> None:
        """
        Send a record to all sinks.

        Args:
            message: Human-readable message
            level: Severity
            content: Additional structured fields
        """
        self._dispatch(self._build_payload(message, level, content))

    def _dispatch(self, payload: dict[str, Any]) -> None:
        for sink in self.sinks:
            try:
                if sink._accepts(payload):
                    sink.emit(payload)
            except Exception as exc:
                print(f"Sink {sink.__class__.__name__} failed: {exc}", file=sys.stderr)

    def log_check(
        self,
        suite: str,
        passed: bool,
        trials: int,
        failures: int,
        context: dict[str, Any] | None = None,
    ) -> None:
        """
        Record the outcome of a property suite.

        Args:
            suite: Suite name (closure, distance, ...)
            passed: Whether every trial passed
            trials: Number of trials run
            failures: Number of failing trials
            context: Extra fields such as seed or group spec
        """
        self.log(
            f"Check {suite}: {'pass' if passed else 'FAIL'}",
            LogLevel.INFO if passed else LogLevel.ERROR,
            {
                "event_type": "check",
                "suite": suite,
                "passed": passed,
                "trials": trials,
                "failures": failures,
                **(context or {}),
            },
        )

    def log_metrics(self, metrics: dict[str, Any], event_type: str = "epoch") -> None:
        """Record one row of a metric stream (an epoch, a sweep level)."""
        self.log(
            f"{event_type} metrics",
            LogLevel.DEBUG,
            {"event_type": event_type, **metrics},
        )

    def log_exception(
        self,
        message: str,
        exception: BaseException,
        context: dict[str, Any] | None = None,
    ) -> None:
        """
        Record an exception with its traceback.

        Args:
            message: What was being attempted
            exception: The exception object
            context: Additional context to include
        """
        self.log(
            message,
            LogLevel.ERROR,
            {
                "event_type": "exception",
                "exception_type": type(exception).__name__,
                "exception_message": str(exception),
                "traceback": tb.format_exception(
                    type(exception), exception, exception.__traceback__
                ),
                **(context or {}),
            },
        )

    def add_sink(self, sink: BaseSink) -> None:
        self.sinks.append(sink)

    def remove_sink(self, sink: BaseSink) -> None:
        """Detach and close a sink."""
        if sink in self.sinks:
            self.sinks.remove(sink)
        sink.close()

    def close(self) -> None:
        """Close all sinks."""
        for sink in self.sinks:
            try:
                sink.close()
            except Exception as exc:
                print(f"Sink {sink.__class__.__name__} close failed: {exc}", file=sys.stderr)

    def __enter__(self) -> Recorder:
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()


def default_sinks() -> list[BaseSink]:
    """
    Create sinks from GMCONV_LOG_LEVEL, GMCONV_LOG_FILE and GMCONV_LOG_COLOR.

    Raises:
        ConfigError: If a variable holds an unusable value.
    """
    raw_level = os.getenv("GMCONV_LOG_LEVEL", "warn")
    try:
        level = LogLevel.parse(raw_level)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"GMCONV_LOG_LEVEL={raw_level!r} is not a log level") from exc

    raw_color = os.getenv("GMCONV_LOG_COLOR", "1")
    if raw_color not in ("0", "1"):
        raise ConfigError(f"GMCONV_LOG_COLOR must be '0' or '1', got {raw_color!r}")

    sinks: list[BaseSink] = [
        ConsoleSink(use_color=raw_color == "1", included_levels=LogLevel.at_least(level))
    ]
    log_file = os.getenv("GMCONV_LOG_FILE")
    if log_file:
        sinks.append(JsonlSink(log_file))
    return sinks


_recorder: Recorder | None = None


def get_recorder() -> Recorder:
    """Process-wide recorder, created from the environment on first use."""
    global _recorder
    if _recorder is None:
        _recorder = Recorder()
    return _recorder


def set_recorder(recorder: Recorder | None) -> None:
    """Replace the process-wide recorder (None resets to environment defaults)."""
    global _recorder
    _recorder = recorder
