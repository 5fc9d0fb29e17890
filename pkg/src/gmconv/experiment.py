"""
Experiment configuration and the train-and-report pipeline behind ``gmconv train``.

A config file is JSON validated against ``schemas/experiment.schema.json``:

    {
      "name": "exact-c8",
      "group": "C8",
      "seed": 0,
      "task": {"kind": "exact_gconv_target", "samples": 256},
      "layers": [{"type": "conv", "channels": 1, "k": 1}],
      "train": {"learning_rate": 0.01, "max_epochs": 300, "patience": 0}
    }

Outputs land in ``output_dir``: metrics.csv, report.json, params/ and, when a
sweep is configured, sweep.csv.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from gmconv.exceptions import ConfigError
from gmconv.group_spec import parse_group
from gmconv.matio import json_default, save_parameters
from gmconv.nn.losses import LossKind
from gmconv.nn.network import LayerConfig, build_network, network_equivariance_error
from gmconv.nn.sweep import run_equivariance_sweep
from gmconv.nn.tasks import INIT_STREAM, SyntheticTask, TaskKind, make_task
from gmconv.nn.train import METRIC_COLUMNS, TrainConfig, accuracy, evaluate, train
from gmconv.telemetry import CsvSink, LogLevel, Recorder, get_recorder


@cache
def experiment_schema() -> dict[str, Any]:
    text = resources.files("gmconv").joinpath("schemas/experiment.schema.json").read_text("utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class SweepConfig:
    levels: tuple[float, ...]
    models: dict[str, tuple[LayerConfig, ...]]


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A validated experiment: group, data, architecture, optimizer and outputs.

    ``seed`` feeds the data draw and the training streams alike.
    """

    group: str
    task: SyntheticTask
    layers: tuple[LayerConfig, ...]
    train: TrainConfig = field(default_factory=TrainConfig)
    name: str = "experiment"
    seed: int = 0
    output_dir: Path = Path("runs/experiment")
    loss: LossKind = LossKind.MSE
    sweep: SweepConfig | None = None

    def with_overrides(
        self, seed: int | None = None, output_dir: str | Path | None = None
    ) -> ExperimentConfig:
        """Copy with CLI overrides applied; a new seed reseeds data and training."""
        seed = self.seed if seed is None else seed
        return replace(
            self,
            task=replace(self.task, seed=seed),
            train=replace(self.train, seed=seed),
            seed=seed,
            output_dir=Path(output_dir) if output_dir is not None else self.output_dir,
        )


def _layers(raw: list[dict[str, Any]]) -> tuple[LayerConfig, ...]:
    return tuple(LayerConfig.from_dict(entry) for entry in raw)


def parse_experiment(raw: dict[str, Any]) -> ExperimentConfig:
    """
    Validate a decoded config and build the dataclasses.

    Raises:
        ConfigError: On any schema violation or inconsistent value; the message
            carries the JSON path of the offending entry.
    """
    validator = jsonschema.Draft202012Validator(experiment_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        location = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise ConfigError(f"{location}: {first.message}")

    seed = int(raw.get("seed", 0))
    task = SyntheticTask(group=raw["group"], seed=seed, **raw["task"])
    default_loss = LossKind.CROSS_ENTROPY if task.kind is TaskKind.INVARIANT else LossKind.MSE
    sweep = None
    if "sweep" in raw:
        sweep = SweepConfig(
            tuple(float(level) for level in raw["sweep"]["levels"]),
            {name: _layers(layers) for name, layers in raw["sweep"]["models"].items()},
        )
        if task.kind is TaskKind.INVARIANT:
            raise ConfigError("sweep: sweeps need a regression task")
    name = raw.get("name", "experiment")
    return ExperimentConfig(
        group=raw["group"],
        task=task,
        layers=_layers(raw["layers"]),
        train=TrainConfig(seed=seed, **raw.get("train", {})),
        name=name,
        seed=seed,
        output_dir=Path(raw.get("output_dir", f"runs/{name}")),
        loss=LossKind(raw.get("loss", default_loss)),
        sweep=sweep,
    )


def load_experiment(path: str | Path) -> ExperimentConfig:
    """
    Read and validate a JSON experiment file.

    Raises:
        ConfigError: If the file is unreadable, not JSON, or fails validation.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_experiment(raw)


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def run_experiment(config: ExperimentConfig, recorder: Recorder | None = None) -> dict[str, Any]:
    """
    Train the configured network and write its artifacts.

    Returns the report that is also written to ``report.json``.
    """
    recorder = recorder or get_recorder()
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    group = parse_group(config.group)
    data = make_task(config.task, group)
    net = build_network(
        group, config.layers, in_channels=1, rng=np.random.default_rng([config.seed, INIT_STREAM])
    )
    recorder.log(
        f"Training {config.name}",
        LogLevel.INFO,
        {"event_type": "train", "group": group.name, "parameters": net.parameter_count()},
    )

    metrics = CsvSink(out / "metrics.csv", METRIC_COLUMNS, included_events=["epoch"])
    recorder.add_sink(metrics)
    try:
        result = train(net, data, config.train, config.loss, recorder)
    finally:
        recorder.remove_sink(metrics)

    probe = data.x_test[: config.train.equivariance_samples]
    final = {
        "train_loss": evaluate(net, data.x_train, data.y_train, config.loss),
        "val_loss": evaluate(net, data.x_val, data.y_val, config.loss),
        "test_loss": evaluate(net, data.x_test, data.y_test, config.loss),
        "equivariance_error": _finite(network_equivariance_error(net, probe)),
    }
    if config.loss is LossKind.CROSS_ENTROPY:
        final["test_accuracy"] = accuracy(net, data.x_test, data.y_test)

    save_parameters(
        out / "params",
        net.parameters(),
        {"name": config.name, "group": config.group, "seed": config.seed},
    )
    report: dict[str, Any] = {
        "name": config.name,
        "group": config.group,
        "group_order": group.order,
        "seed": config.seed,
        "task": str(config.task.kind),
        "loss": str(config.loss),
        "parameter_count": net.parameter_count(),
        "conv_parameters_per_channel_pair": net.conv_kernel_sizes(),
        "flops_per_sample": net.flops_per_sample(),
        "epochs_run": result.epochs_run,
        "stopped_early": result.stopped_early,
        "best_val_loss": result.best_val_loss,
        "final": final,
        "files": {"metrics": "metrics.csv", "params": "params"},
    }

    if config.sweep is not None:
        rows = run_equivariance_sweep(
            config.sweep.levels,
            config.task,
            config.sweep.models,
            config.train,
            csv_path=out / "sweep.csv",
            recorder=recorder,
        )
        report["files"]["sweep"] = "sweep.csv"
        report["sweep"] = [
            {
                "level": row.level,
                "model": row.model,
                "equivariance_error": _finite(row.equivariance_error),
                "test_loss": row.test_loss,
            }
            for row in rows
        ]

    (out / "report.json").write_text(
        json.dumps(report, indent=2, default=json_default), encoding="utf-8"
    )
    recorder.log(
        f"Finished {config.name}",
        LogLevel.INFO,
        {"event_type": "train", "test_loss": final["test_loss"], "epochs": result.epochs_run},
    )
    return report
