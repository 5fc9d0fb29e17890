"""JSON-lines sink for gmconv telemetry."""

import json
from pathlib import Path
from typing import Any

from gmconv.telemetry.levels import LogLevel
from gmconv.telemetry.sinks.base import BaseSink


class JsonlSink(BaseSink):
    """Sink writing one JSON object per line."""

    def __init__(
        self,
        file_path: str | Path,
        append: bool = True,
        default_context: dict[str, Any] | None = None,
        included_levels: list[LogLevel] | None = None,
        included_events: list[str] | None = None,
    ):
        """
        Initialize the sink.

        Args:
            file_path: Path to the JSONL file
            append: Keep existing lines (True) or truncate once at startup (False)
            default_context: Context merged into every record from this sink.
            included_levels: Levels this sink will emit. Defaults to all levels.
            included_events: Event types this sink will emit. Defaults to all events.
        """
        super().__init__(
            default_context=default_context,
            included_levels=included_levels,
            included_events=included_events,
        )
        self.file_path = Path(file_path)
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        if not append:
            self.file_path.write_text("", encoding="utf-8")

    def _emit(self, payload: dict[str, Any]) -> None:
        with self.file_path.open(mode="a", encoding="utf-8") as f:
            f.write(json.dumps(payload, default=str) + "\n")
