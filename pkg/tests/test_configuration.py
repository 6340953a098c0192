import pytest

from gauss_distill import configuration
from gauss_distill.configuration import Command
from gauss_distill.errors import UsageError


class TestParseGrid:
    def test_range(self):
        grid = configuration.parse_grid("0.1:0.9:0.1")
        assert grid == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

    def test_stop_is_included(self):
        grid = configuration.parse_grid("0.05:1.0:0.05")
        assert len(grid) == 20
        assert grid[0] == 0.05
        assert grid[-1] == 1.0

    def test_list(self):
        assert configuration.parse_grid(" 0.3, 0.5 ,1") == [0.3, 0.5, 1.0]

    @pytest.mark.parametrize(
        "text", ["0.1:0.2", "a,b", "0.5:0.1:0.1", "0.1:0.5:0", "0.1:x:0.1"]
    )
    def test_malformed(self, text):
        with pytest.raises(UsageError):
            configuration.parse_grid(text)


class TestConfigFile:
    def test_read(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# nested run\n\nr = 0.8\nq = 0.5, 1.0  # per stage\nstages=2\n"
        )
        assert configuration.read_config_file(str(path)) == {
            "r": "0.8",
            "q": "0.5, 1.0",
            "stages": "2",
        }

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("squeezing = 1\n")
        with pytest.raises(UsageError) as e:
            configuration.read_config_file(str(path))
        assert "squeezing" in str(e.value)

    def test_missing_equals(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("r 1\n")
        with pytest.raises(UsageError):
            configuration.read_config_file(str(path))


class TestRunConfig:
    def test_defaults(self, tmp_path):
        config = configuration.make_run_config(
            ["nested", "-o", str(tmp_path), "-j", "1"]
        )
        assert config.command is Command.NESTED
        assert config.stages == 3
        assert config.q is None
        assert config.r == 1.0
        assert config.T == 0.5
        assert config.four_mode_cutoff == (
            configuration.DEFAULT_FOUR_MODE_CUTOFF
        )
        assert config.argv == ("nested", "-o", str(tmp_path), "-j", "1")

    def test_precedence(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "r = 0.8\nT = 0.3\nstages = 2\nleakage_bound = 1e-3\n"
        )
        config = configuration.make_run_config(
            ["nested", "--config", str(path), "--r", "1.2", "-j", "1"]
        )
        assert config.r == 1.2
        assert config.T == 0.3
        assert config.stages == 2
        assert config.tolerances.leakage_bound == 1e-3

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(UsageError):
            configuration.make_run_config(
                ["stage", "--config", str(tmp_path / "missing.cfg")]
            )

    def test_invalid_file_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("stages = many\n")
        with pytest.raises(UsageError):
            configuration.make_run_config(
                ["nested", "--config", str(path), "-j", "1"]
            )

    def test_jobs_from_environment(self, monkeypatch):
        monkeypatch.setenv(configuration.JOBS_ENV_VAR, "3")
        assert configuration.make_run_config(["figure3"]).jobs == 3
        assert configuration.make_run_config(["figure3", "-j", "2"]).jobs == 2

        monkeypatch.setenv(configuration.JOBS_ENV_VAR, "some")
        with pytest.raises(UsageError):
            configuration.default_jobs()

    def test_q_list(self):
        config = configuration.make_run_config(
            ["nested", "--q", "0.5,1,2", "--stages", "3", "-j", "1"]
        )
        assert config.q == (0.5, 1.0, 2.0)

    @pytest.mark.parametrize(
        "argv",
        [
            ["stage", "--q", "0", "-j", "1"],
            ["nested", "--q", "0.5,1", "--stages", "3", "-j", "1"],
            ["nested", "--stages", "0", "-j", "1"],
            ["stage", "--cutoff", "1", "-j", "1"],
            ["stage", "--T", "high", "-j", "1"],
            ["figure4", "--T", "0.5:0.1:0.1", "-j", "1"],
        ],
    )
    def test_rejected(self, argv):
        with pytest.raises(UsageError):
            configuration.make_run_config(argv)

    def test_bad_flag_exits(self):
        with pytest.raises(SystemExit) as e:
            configuration.make_run_config(["stage", "--no-such-flag"])
        assert e.value.code == 2

    def test_figure_grids(self):
        config = configuration.make_run_config(
            ["figure4", "--T", "0.5,1.0", "--stages", "2", "-j", "1"]
        )
        assert config.T_grid == (0.5, 1.0)
        assert config.q is None

        config = configuration.make_run_config(["figure3", "-j", "1"])
        assert len(config.eps_grid) == 19
        assert config.stages == 4

    def test_to_dict(self):
        config = configuration.make_run_config(
            ["stage", "--q", "1.5", "-j", "1"]
        )
        d = config.to_dict()
        assert d["command"] == "stage"
        assert d["q"] == [1.5]
        assert d["tolerances"]["leakage_bound"] == 1e-4

    def test_rerun(self):
        config = configuration.make_run_config(["rerun", "manifest.json"])
        assert config.command is Command.RERUN
        assert config.manifest == "manifest.json"
