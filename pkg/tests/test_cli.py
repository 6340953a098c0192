import csv
import json
import os

import numpy as np
import pytest

from gauss_distill import actions, cli
from gauss_distill.configuration import OutputFiles


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestFigure3:
    def test_output(self, tmp_path):
        argv = ["figure3", "--eps", "0.1:0.9:0.1", "-o", str(tmp_path)]
        assert cli.run(argv + ["-j", "1"]) == 0

        data_file = tmp_path / OutputFiles.figure3
        rows = read_rows(data_file)
        assert rows[0] == list(cli.FIGURE3_HEADER)
        assert len(rows) == 37
        assert ["0.5", "2", "0.0625"] in rows

        manifest = actions.read_manifest(
            actions.manifest_path(str(data_file))
        )
        assert manifest["command"] == "figure3"
        assert manifest["argv"] == argv + ["-j", "1"]
        assert manifest["outputs"] == {
            OutputFiles.figure3: actions.sha256_of_file(str(data_file))
        }
        assert manifest["config"]["stages"] == 4

    def test_output_is_deterministic(self, tmp_path):
        argv = ["figure3", "-o", str(tmp_path), "-j", "1"]
        data_file = str(tmp_path / OutputFiles.figure3)

        assert cli.run(argv) == 0
        first = read_bytes(data_file)
        assert cli.run(argv) == 0
        assert read_bytes(data_file) == first

    def test_rerun(self, tmp_path):
        assert cli.run(["figure3", "-o", str(tmp_path), "-j", "1"]) == 0
        data_file = str(tmp_path / OutputFiles.figure3)
        first = read_bytes(data_file)
        os.remove(data_file)

        assert cli.run(["rerun", actions.manifest_path(data_file)]) == 0
        assert read_bytes(data_file) == first


class TestExitCodes:
    def test_bad_flag(self, tmp_path):
        assert cli.run(["figure3", "--no-such-flag"]) == 2

    def test_bad_grid(self, tmp_path):
        argv = ["figure3", "--eps", "0.1:0.2", "-o", str(tmp_path)]
        assert cli.run(argv) == 2

    def test_missing_output_dir(self, tmp_path):
        argv = ["figure3", "-o", str(tmp_path / "missing"), "-j", "1"]
        assert cli.run(argv) == 2

    def test_missing_manifest(self, tmp_path):
        assert cli.run(["rerun", str(tmp_path / "missing.json")]) == 2

    def test_rerun_needs_argv(self, tmp_path):
        manifest = tmp_path / "empty.manifest.json"
        manifest.write_text(json.dumps({"argv": []}))
        assert cli.run(["rerun", str(manifest)]) == 2

    def test_failure_writes_error_report(self, tmp_path):
        # q far below the admissible range, so no output state exists
        argv = ["stage", "--T", "0.7", "--q", "0.1", "-o", str(tmp_path)]
        assert cli.run(argv + ["-j", "1"]) == 1

        report = (tmp_path / OutputFiles.error_report).read_text()
        assert "NoConvergenceError" in report
        assert not (tmp_path / OutputFiles.stage_data).exists()


@pytest.mark.slow
class TestProtocolCommands:
    def test_stage(self, tmp_path):
        argv = ["stage", "--r", "1", "--T", "0.5", "--q", "1"]
        assert cli.run(argv + ["-o", str(tmp_path), "-j", "1"]) == 0

        rows = read_rows(tmp_path / OutputFiles.stage_data)
        assert rows[0] == list(cli.STAGE_HEADER)
        assert len(rows) == 2
        epsilon = float(rows[1][cli.STAGE_HEADER.index("epsilon")])
        assert epsilon == pytest.approx((0.5 * np.tanh(1.0)) ** 2)

    def test_nested(self, tmp_path):
        argv = ["nested", "--r", "1", "--T", "0.5", "--stages", "3"]
        assert cli.run(argv + ["-o", str(tmp_path), "-j", "1"]) == 0

        data_file = str(tmp_path / OutputFiles.nested_data)
        rows = read_rows(data_file)[1:]
        column = cli.STAGE_HEADER.index
        assert [int(row[column("stage")]) for row in rows] == [1, 2, 3]
        eps = [float(row[column("epsilon")]) for row in rows]
        assert eps == pytest.approx(
            [0.145006, 0.0210268, 0.00044213], rel=1e-4
        )
        for row in rows:
            assert float(row[column("r")]) == pytest.approx(1.0, abs=1e-6)

        manifest = actions.read_manifest(actions.manifest_path(data_file))
        assert manifest["leakage"]["max_stage_leakage"] > 0

    def test_validate(self, tmp_path):
        assert cli.run(["validate", "-o", str(tmp_path), "-j", "1"]) == 0

        with open(tmp_path / OutputFiles.validation_report) as fh:
            report = json.load(fh)
        assert report["passed"]
        assert all(check["state"] == "passed" for check in report["checks"])
        text = (tmp_path / OutputFiles.validation_text).read_text()
        n_checks = len(report["checks"])
        assert text.endswith("{0} of {0} checks passed\n".format(n_checks))
