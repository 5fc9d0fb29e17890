"""CSV sink for metric streams (training epochs, sweep tables)."""

import csv
from pathlib import Path
from typing import Any

from gmconv.telemetry.levels import LogLevel
from gmconv.telemetry.sinks.base import BaseSink


class CsvSink(BaseSink):
    """
    Sink writing selected payload keys as CSV rows.

    The header is written when the file is created or truncated. Keys missing
    from a record are written as empty cells; extra keys are ignored.
    """

    def __init__(
        self,
        file_path: str | Path,
        columns: list[str],
        append: bool = False,
        default_context: dict[str, Any] | None = None,
        included_levels: list[LogLevel] | None = None,
        included_events: list[str] | None = None,
    ):
        super().__init__(
            default_context=default_context,
            included_levels=included_levels,
            included_events=included_events,
        )
        self.file_path = Path(file_path)
        self.columns = list(columns)
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        if not append or not self.file_path.exists() or self.file_path.stat().st_size == 0:
            with self.file_path.open(mode="w", encoding="utf-8", newline="") as f:
                csv.writer(f).writerow(self.columns)

    def _emit(self, payload: dict[str, Any]) -> None:
        with self.file_path.open(mode="a", encoding="utf-8", newline="") as f:
            csv.writer(f).writerow([_cell(payload.get(column)) for column in self.columns])


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
