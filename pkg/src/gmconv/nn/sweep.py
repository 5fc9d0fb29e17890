"""Data-equivariance sweep: model equivariance error against perturbation level."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from gmconv.nn.losses import LossKind
from gmconv.nn.network import LayerConfig, build_network, network_equivariance_error
from gmconv.nn.tasks import INIT_STREAM, SyntheticTask, TaskKind, make_task
from gmconv.nn.train import TrainConfig, evaluate, train
from gmconv.telemetry import CsvSink, Recorder, get_recorder

SWEEP_COLUMNS = ["level", "model", "equivariance_error", "test_loss"]


@dataclass(frozen=True)
class SweepRow:
    level: float
    model: str
    equivariance_error: float
    test_loss: float


def run_equivariance_sweep(
    levels: Sequence[float],
    task: SyntheticTask,
    models: Mapping[str, Sequence[LayerConfig]],
    train_config: TrainConfig,
    csv_path: str | Path | None = None,
    recorder: Recorder | None = None,
) -> list[SweepRow]:
    """
    For each perturbation level, train every model on the perturbed task and
    record its equivariance error on test inputs and its test MSE.

    Rows go to ``recorder`` (event_type "sweep") and, if given, to a CSV file.
    """
    recorder = recorder or get_recorder()
    sink = CsvSink(csv_path, SWEEP_COLUMNS, included_events=["sweep"]) if csv_path else None
    if sink is not None:
        recorder.add_sink(sink)
    rows: list[SweepRow] = []
    try:
        for level in levels:
            data = make_task(replace(task, kind=TaskKind.PERTURBED, sigma=float(level)))
            probe = data.x_test[: train_config.equivariance_samples]
            for name, layers in models.items():
                net = build_network(
                    data.group, layers, 1, np.random.default_rng([train_config.seed, INIT_STREAM])
                )
                train(net, data, train_config, LossKind.MSE, recorder)
                row = SweepRow(
                    float(level),
                    name,
                    network_equivariance_error(net, probe),
                    evaluate(net, data.x_test, data.y_test, LossKind.MSE),
                )
                rows.append(row)
                recorder.log_metrics(asdict(row), event_type="sweep")
    finally:
        if sink is not None:
            recorder.remove_sink(sink)
    return rows
