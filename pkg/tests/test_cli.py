"""Tests for the gmconv command line."""

import json

import numpy as np
import pytest

from gmconv import checks
from gmconv.cli import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, main
from gmconv.checks import SuiteResult
from gmconv.group_spec import parse_group
from gmconv.matio import write_matrix
from gmconv.matrices import densify, gm_from_coeffs


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGroupInfo:
    @pytest.mark.parametrize(
        ("spec", "order", "balls"),
        [("C8", 8, [1, 3, 5, 7, 8]), ("C4xC4", 16, [1, 9, 16]), ("C1", 1, [1])],
    )
    def test_ball_sizes(self, capsys, spec, order, balls):
        code, out, _ = _run(capsys, "group-info", "--group", spec)

        info = json.loads(out)
        assert code == EXIT_OK
        assert info["order"] == order
        assert info["ball_sizes"] == balls
        assert info["diameter"] == len(balls) - 1
        assert sum(info["distance_histogram"]) == order

    def test_csv(self, capsys):
        code, out, _ = _run(capsys, "group-info", "--group", "C4", "--format", "csv")

        assert code == EXIT_OK
        assert out.splitlines() == ["k,ball_size", "0,1", "1,3", "2,4"]

    def test_text(self, capsys):
        _, out, _ = _run(capsys, "group-info", "--group", "D3", "--format", "text")

        assert "order: 6" in out.splitlines()

    def test_bad_spec(self, capsys):
        code, out, err = _run(capsys, "group-info", "--group", "C8y")

        assert code == EXIT_ERROR
        assert out == ""
        assert "position 2" in err


class TestAnalyze:
    def test_group_matrix(self, capsys, tmp_path):
        G = parse_group("C4")
        path = write_matrix(tmp_path / "m.csv", densify(gm_from_coeffs(G, [1.0, 2.0, 0.0, -1.0])))

        code, out, _ = _run(
            capsys, "analyze", str(path), "--group", "C4", "--class", "gm", "--class", "ldr:1"
        )

        report = json.loads(out)
        assert code == EXIT_OK
        assert report["distance"] < 1e-12
        assert report["displacement_rank"] == 0
        assert report["coefficients"] == pytest.approx([1.0, 2.0, 0.0, -1.0])
        assert report["classes"]["gm"]["dim_D"] == 0
        assert report["classes"]["gm"]["contains_matrix"] is True
        assert report["classes"]["ldr:1"]["dim_D"] == 4
        assert report["distance_bounds"]["transpose"]["holds"] is True
        assert report["distance_bounds"]["kronecker"]["holds"] is True
        assert report["distance_bounds"]["kronecker"]["partner_group"] == "C4"
        assert report["class_bounds"]["gm"]["transpose"]["holds"] is True
        assert report["class_bounds"]["gm"]["kronecker"]["dims"]["d_kron"] == 0
        assert report["class_bounds"]["gm+ldr:1"]["sum"]["holds"] is True
        assert "transpose" in report["class_bounds"]["ldr:1"]

    def test_kronecker_partner(self, capsys, tmp_path):
        G = parse_group("C4")
        path = write_matrix(tmp_path / "m.csv", densify(gm_from_coeffs(G, [1.0, 0.0, 0.5, 0.0])))
        partner = write_matrix(tmp_path / "n.csv", np.array([[1.0, 2.0], [0.0, 1.0]]))

        code, out, _ = _run(
            capsys, "analyze", str(path), "--group", "C4", "--other", "C2",
            "--other-matrix", str(partner),
        )

        kron = json.loads(out)["distance_bounds"]["kronecker"]
        assert code == EXIT_OK
        assert kron["partner_group"] == "C2"
        assert kron["lhs"] > 0.0
        assert kron["holds"] is True

    def test_large_group_skips_self_kronecker(self, capsys, tmp_path):
        path = write_matrix(tmp_path / "m.gmat", np.eye(33))

        _, out, _ = _run(capsys, "analyze", str(path), "--group", "C33")

        report = json.loads(out)
        assert "skipped" in report["distance_bounds"]["kronecker"]
        assert report["class_bounds"]["gm"]["kronecker"]["holds"] is True

    def test_perturbed_matrix(self, capsys, tmp_path):
        M = np.eye(4)
        M[0, 1] = 1.0
        path = write_matrix(tmp_path / "m.gmat", M)

        _, out, _ = _run(capsys, "analyze", str(path), "--group", "C4")

        report = json.loads(out)
        assert report["distance"] > 0.5
        assert report["displacement_rank"] > 0
        assert report["classes"]["gm"]["contains_matrix"] is False

    def test_wrong_size(self, capsys, tmp_path):
        path = write_matrix(tmp_path / "m.csv", np.eye(3))

        code, _, err = _run(capsys, "analyze", str(path), "--group", "C4")

        assert code == EXIT_ERROR
        assert "gmconv: " in err

    def test_unknown_class(self, capsys, tmp_path):
        path = write_matrix(tmp_path / "m.csv", np.eye(4))

        code, _, _ = _run(capsys, "analyze", str(path), "--group", "C4", "--class", "toeplitz")

        assert code == EXIT_ERROR


class TestCheck:
    def test_pass(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "check", "equiv", "--group", "D3", "--trials", "3", "--out", str(tmp_path)
        )

        summary = json.loads(out)
        assert code == EXIT_OK
        assert summary["passed"] is True
        assert summary["suite"] == "equiv"
        assert "counterexamples" not in summary

    def test_failure_dumps_counterexamples(self, capsys, tmp_path, monkeypatch):
        def failing(G, options):
            result = SuiteResult("equiv", G.name, options.trials, options.seed)
            result.fail(0, "planted failure", M=np.eye(G.order))
            return result

        monkeypatch.setitem(checks.SUITES, "equiv", failing)

        code, out, _ = _run(capsys, "check", "equiv", "--group", "C4", "--out", str(tmp_path))

        summary = json.loads(out)
        assert code == EXIT_CHECK_FAILED
        assert summary["counterexamples"] == [str(tmp_path / "equiv" / "trial-0")]
        assert (tmp_path / "equiv" / "trial-0" / "M.gmat").exists()

    @pytest.mark.parametrize(
        ("alias", "extra", "suite"),
        [
            ("prop1", ["--group", "D4"], "closure"),
            ("prop2", ["--group", "C6", "--other", "C4"], "distance"),
            ("lemma1", ["--group", "D4"], "restriction"),
            ("ddim", ["--window", "8", "--radius", "1"], "padding"),
        ],
    )
    def test_short_names(self, capsys, tmp_path, alias, extra, suite):
        code, out, _ = _run(
            capsys, "check", alias, *extra, "--trials", "3", "--out", str(tmp_path)
        )

        summary = json.loads(out)
        assert code == EXIT_OK
        assert summary["suite"] == suite

    def test_unknown_suite_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["check", "everything"])

        assert info.value.code == 2


class TestTrain:
    def _config(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(
            json.dumps(
                {
                    "name": "cli-run",
                    "group": "C4",
                    "task": {"kind": "exact_gconv_target", "samples": 16, "val_samples": 4,
                             "test_samples": 8},
                    "layers": [{"type": "conv"}],
                    "train": {"max_epochs": 2},
                }
            ),
            encoding="utf-8",
        )
        return path

    def test_run(self, capsys, tmp_path):
        out_dir = tmp_path / "run"

        code, out, _ = _run(
            capsys, "train", str(self._config(tmp_path)), "--out", str(out_dir), "--seed", "4"
        )

        report = json.loads(out)
        assert code == EXIT_OK
        assert report["seed"] == 4
        assert (out_dir / "report.json").exists()
        assert (out_dir / "metrics.csv").exists()

    def test_csv_summary(self, capsys, tmp_path):
        code, out, _ = _run(
            capsys, "train", str(self._config(tmp_path)), "--out", str(tmp_path / "run"),
            "--format", "csv",
        )

        header, row = out.splitlines()
        assert code == EXIT_OK
        assert header.split(",")[0] == "name"
        assert row.startswith("cli-run,")

    def test_missing_config(self, capsys, tmp_path):
        code, _, err = _run(capsys, "train", str(tmp_path / "absent.json"))

        assert code == EXIT_ERROR
        assert "cannot read" in err


class TestEnvironment:
    def test_bad_log_level(self, capsys, monkeypatch):
        monkeypatch.setenv("GMCONV_LOG_LEVEL", "chatty")

        code, _, err = _run(capsys, "group-info", "--group", "C4")

        assert code == EXIT_ERROR
        assert "GMCONV_LOG_LEVEL" in err
