"""Tests for Recorder payloads, fan-out, failure isolation and the process default."""

from typing import Any

import pytest

from gmconv.telemetry import CsvSink, LogLevel, Recorder, get_recorder, set_recorder
from gmconv.telemetry.sinks.base import BaseSink


class _ListSink(BaseSink):
    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.payloads: list[dict[str, Any]] = []
        self.closed = False

    def _emit(self, payload: dict[str, Any]) -> None:
        self.payloads.append(payload)

    def close(self) -> None:
        self.closed = True


class _BrokenSink(BaseSink):
    def _emit(self, payload: dict[str, Any]) -> None:
        raise RuntimeError("disk full")


@pytest.fixture
def sink():
    return _ListSink()


@pytest.fixture
def recorder(sink):
    return Recorder(sinks=[sink], default_context={"run": "test"})


class TestPayload:
    def test_fields(self, recorder, sink):
        recorder.log("hello", LogLevel.INFO, {"group": "C8"})

        payload = sink.payloads[0]
        assert payload["message"] == "hello"
        assert payload["level"] == "info"
        assert payload["group"] == "C8"
        assert payload["run"] == "test"
        assert isinstance(payload["timestamp_ms"], int)

    def test_content_overrides_default_context(self, recorder, sink):
        recorder.log("hello", LogLevel.INFO, {"run": "other"})

        assert sink.payloads[0]["run"] == "other"


class TestStructuredHelpers:
    def test_log_check_pass_is_info(self, recorder, sink):
        recorder.log_check("closure", True, 1000, 0, {"seed": 0})

        payload = sink.payloads[0]
        assert payload["level"] == "info"
        assert payload["event_type"] == "check"
        assert payload["suite"] == "closure"
        assert payload["trials"] == 1000
        assert payload["seed"] == 0

    def test_log_check_failure_is_error(self, recorder, sink):
        recorder.log_check("dimension", False, 8, 2)

        assert sink.payloads[0]["level"] == "error"
        assert sink.payloads[0]["failures"] == 2

    def test_log_metrics_is_debug_epoch(self, recorder, sink):
        recorder.log_metrics({"epoch": 1, "train_loss": 0.5})

        payload = sink.payloads[0]
        assert payload["level"] == "debug"
        assert payload["event_type"] == "epoch"
        assert payload["train_loss"] == 0.5

    def test_log_metrics_custom_event(self, recorder, sink):
        recorder.log_metrics({"level_value": 0.1}, event_type="sweep")

        assert sink.payloads[0]["event_type"] == "sweep"

    def test_log_exception_captures_traceback(self, recorder, sink):
        try:
            raise ValueError("bad input")
        except ValueError as exc:
            recorder.log_exception("parsing failed", exc, {"spec": "C0"})

        payload = sink.payloads[0]
        assert payload["level"] == "error"
        assert payload["exception_type"] == "ValueError"
        assert payload["exception_message"] == "bad input"
        assert any("bad input" in line for line in payload["traceback"])
        assert payload["spec"] == "C0"


class TestDispatch:
    def test_level_filter_applies_per_sink(self, sink):
        quiet = _ListSink(included_levels=[LogLevel.ERROR])
        recorder = Recorder(sinks=[sink, quiet])

        recorder.log("detail", LogLevel.DEBUG)

        assert len(sink.payloads) == 1
        assert quiet.payloads == []

    def test_failing_sink_does_not_stop_others(self, sink, capsys):
        recorder = Recorder(sinks=[_BrokenSink(), sink])

        recorder.log("hello", LogLevel.INFO)

        assert len(sink.payloads) == 1
        assert "_BrokenSink failed: disk full" in capsys.readouterr().err

    def test_csv_sink_receives_only_its_event(self, tmp_path):
        path = tmp_path / "metrics.csv"
        recorder = Recorder(sinks=[CsvSink(path, ["epoch"], included_events=["epoch"])])

        recorder.log("started", LogLevel.INFO)
        recorder.log_metrics({"epoch": 1})
        recorder.log_metrics({"epoch": 99}, event_type="sweep")

        assert path.read_text(encoding="utf-8").splitlines() == ["epoch", "1"]

    def test_remove_sink_closes_it(self, recorder, sink):
        recorder.remove_sink(sink)

        assert sink.closed
        assert recorder.sinks == []

    def test_context_manager_closes_sinks(self, sink):
        with Recorder(sinks=[sink]) as recorder:
            recorder.log("inside", LogLevel.INFO)

        assert sink.closed


class TestProcessRecorder:
    def test_set_and_get(self, recorder):
        set_recorder(recorder)
        try:
            assert get_recorder() is recorder
        finally:
            set_recorder(None)

    def test_reset_builds_from_environment(self, monkeypatch):
        monkeypatch.delenv("GMCONV_LOG_FILE", raising=False)
        set_recorder(None)
        try:
            assert get_recorder() is get_recorder()
        finally:
            set_recorder(None)
