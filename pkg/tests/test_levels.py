"""Tests for LogLevel parsing, severity order and payload serialization."""

import json

import pytest

from gmconv.telemetry.levels import LogLevel

BY_SEVERITY = list(LogLevel)


class TestParse:
    @pytest.mark.parametrize(
        ("raw", "level"),
        [("warn", LogLevel.WARN), ("DEBUG", LogLevel.DEBUG), ("Error", LogLevel.ERROR)],
    )
    def test_value_or_name(self, raw, level):
        assert LogLevel.parse(raw) is level

    def test_unknown(self):
        with pytest.raises(KeyError):
            LogLevel.parse("chatty")


class TestSeverity:
    def test_declaration_order_is_severity(self):
        assert [level.value for level in BY_SEVERITY] == [
            "trace", "debug", "info", "warn", "error", "fatal",
        ]
        assert sorted(reversed(BY_SEVERITY)) == BY_SEVERITY

    def test_not_alphabetical(self):
        assert LogLevel.WARN > LogLevel.INFO
        assert not LogLevel.DEBUG >= LogLevel.ERROR

    @pytest.mark.parametrize(
        ("floor", "expected"),
        [(LogLevel.WARN, ["warn", "error", "fatal"]), ("info", ["info", "warn", "error", "fatal"]),
         ("FATAL", ["fatal"])],
    )
    def test_at_least(self, floor, expected):
        assert LogLevel.at_least(floor) == expected

    def test_other_types_are_not_comparable(self):
        assert LogLevel.INFO.__lt__("info") is NotImplemented
        with pytest.raises(TypeError):
            _ = LogLevel.INFO < 3


class TestSerialization:
    def test_payload_keeps_plain_strings(self):
        payload = json.loads(json.dumps({"level": LogLevel.ERROR, "suite": "equiv"}))

        assert payload == {"level": "error", "suite": "equiv"}
        assert LogLevel(payload["level"]) is LogLevel.ERROR
