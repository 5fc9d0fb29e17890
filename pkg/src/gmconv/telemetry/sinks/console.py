"""Console sink for gmconv telemetry."""

import json
import sys
from datetime import datetime
from typing import Any, TextIO

from gmconv._compat import UTC
from gmconv.telemetry.levels import LogLevel
from gmconv.telemetry.sinks.base import BaseSink


class ConsoleSink(BaseSink):
    """Sink printing one human-readable line per record."""

    # ANSI color codes
    COLORS = {
        "trace": "\033[90m",
        "debug": "\033[36m",
        "info": "\033[32m",
        "warn": "\033[33m",
        "error": "\033[31m",
        "fatal": "\033[35m",
        "reset": "\033[0m",
    }

    def __init__(
        self,
        use_color: bool = True,
        stream: TextIO | None = None,
        default_context: dict[str, Any] | None = None,
        included_levels: list[LogLevel] | None = None,
        included_events: list[str] | None = None,
    ):
        """
        Initialize console sink.

        Args:
            use_color: Whether to use ANSI color codes
            stream: Fixed output stream. If None, warn and above go to stderr, the rest to stdout.
            default_context: Context merged into every record from this sink.
            included_levels: Levels this sink will emit. Defaults to all levels.
            included_events: Event types this sink will emit. Defaults to all events.
        """
        super().__init__(
            default_context=default_context,
            included_levels=included_levels,
            included_events=included_events,
        )
        self.use_color = use_color
        self.stream = stream

    def _emit(self, payload: dict[str, Any]) -> None:
        """
        Print ``timestamp  LEVEL  message  {context}``.

        Args:
            payload: Record to print
        """
        level = payload.get("level", "info")
        message = payload.get("message", "")
        dt = datetime.fromtimestamp(payload.get("timestamp_ms", 0) / 1000, tz=UTC)
        timestamp = dt.strftime("%Y-%m-%d %H:%M:%S.") + f"{dt.microsecond // 1000:03d}"

        stream = self.stream
        if stream is None:
            stream = sys.stderr if level in ("warn", "error", "fatal") else sys.stdout

        level_str = level.upper().ljust(5)
        if self.use_color:
            color = self.COLORS.get(level, "")
            formatted = f"{timestamp}  {color}{level_str}{self.COLORS['reset']}  {message}"
        else:
            formatted = f"{timestamp}  {level_str}  {message}"

        context = {
            k: v for k, v in payload.items() if k not in ("level", "message", "timestamp_ms")
        }
        if context:
            formatted += f"  {json.dumps(context, default=str)}"

        print(formatted, file=stream)
