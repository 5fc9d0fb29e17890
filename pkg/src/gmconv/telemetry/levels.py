"""Log level enumeration for gmconv run telemetry."""

from gmconv._compat import StrEnum


class LogLevel(StrEnum):
    """
    Severity of a telemetry record, ordered trace < debug < info < warn < error < fatal.

    Inherits from str so payloads serialize to JSON unchanged. Comparisons use
    severity order, not alphabetical order::

        LogLevel.WARN > LogLevel.INFO            # True
        LogLevel.at_least(LogLevel.WARN)         # [WARN, ERROR, FATAL]
    """

    TRACE = "trace"
    DEBUG = "debug"
    INFO = "info"
    WARN = "warn"
    ERROR = "error"
    FATAL = "fatal"

    @property
    def severity(self) -> int:
        return _SEVERITY[self]

    @classmethod
    def parse(cls, raw: str) -> "LogLevel":
        """Accept either a value ("warn") or a member name ("WARN")."""
        try:
            return cls(raw.lower())
        except ValueError:
            return cls[raw.upper()]

    @classmethod
    def at_least(cls, level: "LogLevel | str") -> list["LogLevel"]:
        """All levels at or above ``level``."""
        floor = level if isinstance(level, LogLevel) else cls.parse(level)
        return [member for member in cls if member.severity >= floor.severity]

    def __ge__(self, other):
        if isinstance(other, LogLevel):
            return self.severity >= other.severity
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, LogLevel):
            return self.severity > other.severity
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, LogLevel):
            return self.severity <= other.severity
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, LogLevel):
            return self.severity < other.severity
        return NotImplemented


_SEVERITY = {level: rank for rank, level in enumerate(LogLevel)}
