"""Base sink interface for gmconv telemetry."""

from abc import ABC, abstractmethod
from typing import Any

from gmconv.telemetry.levels import LogLevel


class BaseSink(ABC):
    """Abstract base class for telemetry sinks."""

    def __init__(
        self,
        default_context: dict[str, Any] | None = None,
        included_levels: list[LogLevel] | None = None,
        included_events: list[str] | None = None,
    ):
        """
        Initialize the sink.

        Args:
            default_context: Context merged into every record from this sink.
            included_levels: Levels this sink will emit. Defaults to all levels.
            included_events: If given, only records whose ``event_type`` is listed are emitted.
        """
        self.default_context = dict(default_context or {})
        self.included_levels = (
            list(included_levels) if included_levels is not None else list(LogLevel)
        )
        self.included_events = list(included_events) if included_events is not None else None

    def emit(self, payload: dict[str, Any]) -> None:
        """
        Merge sink default_context into the payload and delegate to _emit.

        Args:
            payload: Dictionary containing the record
        """
        merged = {**self.default_context, **payload} if self.default_context else payload
        self._emit(merged)

    @abstractmethod
    def _emit(self, payload: dict[str, Any]) -> None:
        """
        Write a record to the destination.

        Args:
            payload: Record with sink context already merged
        """
        pass

    def close(self) -> None:
        """Release sink resources. Subclasses can override if needed."""
        return None

    def _accepts(self, payload: dict[str, Any]) -> bool:
        """True if the record passes both the level and the event filter."""
        level = LogLevel(payload.get("level", LogLevel.INFO))
        if level not in self.included_levels:
            return False
        if self.included_events is None:
            return True
        return payload.get("event_type") in self.included_events
